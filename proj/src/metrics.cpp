#include "epl/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace epl {

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::size_t count) {
  if (truth >= k_ || pred >= k_) throw Error("confusion: label outside [0, k)");
  counts_[truth * k_ + pred] += count;
  total_ += count;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < k_; ++c) t += at(c, c);
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < k_; ++c) s += at(truth, c);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < k_; ++r) s += at(r, pred);
  return s;
}

ConfusionMatrix confusion(const LabelVector& pred, const LabelVector& truth,
                          std::span<const std::size_t> indices, std::size_t classes) {
  if (indices.empty()) throw Error("confusion: empty index set");
  ConfusionMatrix cm(classes);
  for (auto i : indices) {
    if (i >= pred.size() || i >= truth.size()) throw Error("confusion: index out of range");
    if (!pred.labeled(i) || !truth.labeled(i)) {
      throw Error("confusion: index " + std::to_string(i) + " is unlabeled");
    }
    cm.add(static_cast<std::size_t>(truth.values[i]), static_cast<std::size_t>(pred.values[i]));
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error("accuracy: empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double expected_agreement(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error("expected_agreement: empty confusion matrix");
  const double n = static_cast<double>(cm.total());
  double pe = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    pe += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  }
  return pe / (n * n);
}

double cohen_kappa(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error("cohen_kappa: empty confusion matrix");
  const double po = accuracy(cm);
  const double pe = expected_agreement(cm);
  // p_e == 1 only when every sample sits in one cell, which forces p_o == 1.
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

ScoreReport score(const ConfusionMatrix& cm) {
  ScoreReport r;
  r.accuracy = accuracy(cm);
  r.kappa = cohen_kappa(cm);
  r.per_class_recall.resize(cm.classes(), 0.0);
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto rs = cm.row_sum(c);
    if (rs) r.per_class_recall[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(rs);
  }
  return r;
}

std::string to_csv_row(const std::string& dataset, const std::string& method, std::uint64_t seed,
                       const ScoreReport& r) {
  char acc[32], kap[32];
  auto a = std::to_chars(acc, acc + sizeof acc, r.accuracy, std::chars_format::fixed, 6);
  auto k = std::to_chars(kap, kap + sizeof kap, r.kappa, std::chars_format::fixed, 6);
  return dataset + "," + method + "," + std::to_string(seed) + "," + std::string(acc, a.ptr) +
         "," + std::string(kap, k.ptr);
}

double knn_consistency(const Matrix& points, const LabelVector& labels, std::size_t k, Exec exec) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw Error("knn_consistency: label count does not match points");
  if (n < 2) throw Error("knn_consistency: need at least 2 points");
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels.labeled(i)) throw Error("knn_consistency: point " + std::to_string(i) + " is unlabeled");
  }
  k = std::clamp<std::size_t>(k, 1, n - 1);
  const auto hits = kernels::knn_same_label(points, labels.values, k, exec);
  // Integer total first; only the final division is floating point.
  const std::size_t total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  return static_cast<double>(total) / static_cast<double>(n * k);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("spearman: series lengths differ");
  if (a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double m = static_cast<double>(a.size() + 1) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - m) * (rb[i] - m);
    saa += (ra[i] - m) * (ra[i] - m);
    sbb += (rb[i] - m) * (rb[i] - m);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace epl
