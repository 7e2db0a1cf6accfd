#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "epl/common.hpp"
#include "epl/kernels.hpp"

namespace epl {

/// Exact t-SNE settings. Defaults follow the widely used reference
/// implementation.
struct ProjectionConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  double init_sigma = 1e-4;
  double min_gain = 0.01;
  double entropy_tolerance = 1e-5;
  std::uint64_t seed = 0;

  void validate(std::size_t n) const;
  std::string describe() const;
};

struct Embedding2D {
  Matrix coords;  // n x 2
  double final_kl = 0.0;
  int iterations_run = 0;
  std::vector<double> kl_tail;        // KL after each of the last 50 iterations
  bool kl_tail_non_increasing = true; // within 1e-3 between consecutive entries
};

/// Symmetric joint probabilities P = (P_cond + P_cond^T) / 2n where row i of
/// P_cond is a Gaussian kernel whose bandwidth is bisected until the row's
/// perplexity is within `tol` of the target. Rows whose off-diagonal
/// distances are all equal get the uniform distribution.
Matrix pairwise_affinities(const Matrix& features, double perplexity, double tol,
                           Exec exec = Exec::Parallel);

/// Perplexity 2^H of one conditional row (diagonal ignored).
double row_perplexity(std::span<const double> conditional, std::size_t self);

/// Conditional (asymmetric) affinities used by pairwise_affinities.
Matrix conditional_affinities(const Matrix& features, double perplexity, double tol,
                              Exec exec = Exec::Parallel);

double kl_divergence(const Matrix& p, const Matrix& coords, Exec exec = Exec::Parallel);

/// Called after every iteration with the zero-based iteration index and the
/// current (centred) coordinates.
using TsneObserver = std::function<void(int, const Matrix&)>;

Embedding2D tsne_project(const Matrix& features, const ProjectionConfig& config,
                         const TsneObserver& observer = {}, Exec exec = Exec::Parallel);

/// CSV node,x,y[,label]. `node_ids` maps embedding rows back to dataset
/// indices; an empty `labels` omits the column.
void write_embedding_csv(const std::filesystem::path& path, const Matrix& coords,
                         std::span<const std::size_t> node_ids, const LabelVector* labels = nullptr);

struct EmbeddingFile {
  Matrix coords;
  std::vector<std::size_t> node_ids;
  LabelVector labels;  // empty when the file has no label column
};

EmbeddingFile read_embedding_csv(const std::filesystem::path& path);

}  // namespace epl
