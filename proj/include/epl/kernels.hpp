#pragma once

// Data-parallel inner loops. Every kernel has a serial reference path and an
// OpenMP path; both evaluate each output row with the same row function and
// reduce across rows in index order, so their results are bitwise equal.

#include <span>
#include <vector>

#include "epl/common.hpp"

namespace epl {

enum class Exec { Serial, Parallel };

namespace kernels {

/// Squared Euclidean distances between all rows of `x` (n x n, zero diagonal).
Matrix pairwise_sq_distances(const Matrix& x, Exec exec = Exec::Parallel);

/// Exact t-SNE gradient of KL(p_scale * P || Q) with respect to the 2D
/// coordinates `y`, written into `grad` (resized to n x 2).
void tsne_gradient(const Matrix& p, const Matrix& y, double p_scale, Matrix& grad,
                   Exec exec = Exec::Parallel);

/// KL(P || Q) for Student-t similarities Q of `y`; q is floored at 1e-12.
double tsne_kl(const Matrix& p, const Matrix& y, Exec exec = Exec::Parallel);

/// For every point, how many of its k nearest neighbours (Euclidean, ties by
/// lower index) carry the same label. k is capped at n - 1.
std::vector<std::size_t> knn_same_label(const Matrix& points, std::span<const Label> labels,
                                        std::size_t k, Exec exec = Exec::Parallel);

}  // namespace kernels
}  // namespace epl
