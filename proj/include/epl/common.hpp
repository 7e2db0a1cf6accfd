#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epl {

/// Thrown for every contract violation reported by the library. The message
/// names the offending row, sample, or parameter where there is one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Rows picked by `indices`, in that order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Label = int;

/// Distinguished "no label" sentinel; never a valid class id.
inline constexpr Label kUnlabeled = -1;

enum class Provenance : std::uint8_t { True, Pseudo };

/// Per-sample class ids with an Unlabeled sentinel and a provenance tag.
struct LabelVector {
  std::vector<Label> values;
  std::vector<Provenance> provenance;

  LabelVector() = default;
  explicit LabelVector(std::size_t n)
      : values(n, kUnlabeled), provenance(n, Provenance::True) {}
  /// All entries true-provenance.
  static LabelVector from_labels(std::vector<Label> labels);

  std::size_t size() const { return values.size(); }
  bool labeled(std::size_t i) const { return values[i] != kUnlabeled; }
  void set(std::size_t i, Label value, Provenance p) {
    values[i] = value;
    provenance[i] = p;
  }
};

/// Seeded random stream. All stochastic steps draw from one of these so a
/// run is a pure function of its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  template <class It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

double euclidean(std::span<const double> a, std::span<const double> b);
double squared_euclidean(std::span<const double> a, std::span<const double> b);

}  // namespace epl
