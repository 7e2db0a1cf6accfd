#pragma once
// Shared fixtures for the unit tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "epl/common.hpp"
#include "epl/dataset.hpp"

namespace test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("epl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// k classes of `per` samples each, class-major, one zero feature column.
inline epl::Dataset balanced(int k, int per) {
  epl::Dataset d;
  d.class_count = k;
  d.features = epl::Matrix(static_cast<std::size_t>(k * per), 1);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < per; ++i) d.labels.push_back(c);
  }
  return d;
}

inline void shuffle_labels(std::vector<epl::Label>& labels, epl::Rng& rng) { rng.shuffle(labels.begin(), labels.end()); }

inline epl::Matrix random_matrix(std::size_t rows, std::size_t cols, epl::Rng& rng, double scale = 1.0) {
  epl::Matrix m(rows, cols);
  for (auto& v : m.values()) v = scale * rng.normal();
  return m;
}

/// |a - b| / max(|a|, |b|, floor): relative error that tolerates values near 0.
inline double rel_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace test
