#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epl/common.hpp"
#include "epl/kernels.hpp"

namespace epl {

/// k x k counts, rows = truth, columns = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return k_; }
  std::size_t total() const { return total_; }
  std::size_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
  void add(std::size_t truth, std::size_t pred, std::size_t count = 1);

  std::size_t trace() const;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t col_sum(std::size_t pred) const;

 private:
  std::size_t k_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

/// Counts (truth, prediction) pairs over `indices`. Labels must be set on
/// every listed index and lie in [0, classes).
ConfusionMatrix confusion(const LabelVector& pred, const LabelVector& truth,
                          std::span<const std::size_t> indices, std::size_t classes);

double accuracy(const ConfusionMatrix& cm);

/// Chance agreement sum_c row_c * col_c / n^2.
double expected_agreement(const ConfusionMatrix& cm);

/// (p_o - p_e) / (1 - p_e); 1 when both agreements are 1.
double cohen_kappa(const ConfusionMatrix& cm);

struct ScoreReport {
  double accuracy = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class_recall;
};

ScoreReport score(const ConfusionMatrix& cm);

/// One CSV row: dataset,method,seed,accuracy,kappa.
std::string to_csv_row(const std::string& dataset, const std::string& method, std::uint64_t seed,
                       const ScoreReport& r);

inline constexpr std::size_t kDefaultNeighbours = 10;

/// Mean fraction of each point's k nearest neighbours sharing its label.
/// k is capped at n - 1.
double knn_consistency(const Matrix& points, const LabelVector& labels,
                       std::size_t k = kDefaultNeighbours, Exec exec = Exec::Parallel);

/// Spearman rank correlation with average ranks for ties; nullopt when
/// either series is constant.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

}  // namespace epl
