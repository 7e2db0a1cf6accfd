#include "epl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace epl::kernels {
namespace {

// Runs body(i) for i in [0, n), on the OpenMP team when exec is Parallel.
template <class Body>
void for_rows(std::size_t n, Exec exec, Body&& body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

inline double student_t(const Matrix& y, std::size_t i, std::size_t j) {
  const double dx = y(i, 0) - y(j, 0);
  const double dy = y(i, 1) - y(j, 1);
  return 1.0 / (1.0 + dx * dx + dy * dy);
}

double normalizer(const Matrix& y, Exec exec) {
  const std::size_t n = y.rows();
  std::vector<double> row_sum(n, 0.0);
  for_rows(n, exec, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) s += student_t(y, i, j);
    }
    row_sum[i] = s;
  });
  double z = 0.0;
  for (double s : row_sum) z += s;
  return z;
}

}  // namespace

Matrix pairwise_sq_distances(const Matrix& x, Exec exec) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for_rows(n, exec, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : squared_euclidean(x.row(i), x.row(j));
  });
  return d;
}

void tsne_gradient(const Matrix& p, const Matrix& y, double p_scale, Matrix& grad, Exec exec) {
  const std::size_t n = y.rows();
  if (grad.rows() != n || grad.cols() != 2) grad = Matrix(n, 2);
  const double z = normalizer(y, exec);
  for_rows(n, exec, [&](std::size_t i) {
    double gx = 0.0, gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double num = student_t(y, i, j);
      const double mult = (p_scale * p(i, j) - num / z) * num;
      gx += mult * (y(i, 0) - y(j, 0));
      gy += mult * (y(i, 1) - y(j, 1));
    }
    grad(i, 0) = 4.0 * gx;
    grad(i, 1) = 4.0 * gy;
  });
}

double tsne_kl(const Matrix& p, const Matrix& y, Exec exec) {
  const std::size_t n = y.rows();
  const double z = normalizer(y, exec);
  std::vector<double> row_kl(n, 0.0);
  for_rows(n, exec, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || p(i, j) <= 0.0) continue;
      const double q = std::max(student_t(y, i, j) / z, 1e-12);
      s += p(i, j) * std::log(p(i, j) / q);
    }
    row_kl[i] = s;
  });
  double kl = 0.0;
  for (double s : row_kl) kl += s;
  return kl;
}

std::vector<std::size_t> knn_same_label(const Matrix& points, std::span<const Label> labels,
                                        std::size_t k, Exec exec) {
  const std::size_t n = points.rows();
  std::vector<std::size_t> hits(n, 0);
  k = std::min(k, n == 0 ? 0 : n - 1);
  if (k == 0) return hits;
  for_rows(n, exec, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(squared_euclidean(points.row(i), points.row(j)), j);
    }
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
    std::size_t same = 0;
    for (std::size_t r = 0; r < k; ++r) same += labels[cand[r].second] == labels[i] ? 1 : 0;
    hits[i] = same;
  });
  return hits;
}

}  // namespace epl::kernels
