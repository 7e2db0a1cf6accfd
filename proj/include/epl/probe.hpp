#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "epl/common.hpp"
#include "epl/kernels.hpp"

namespace epl {

struct LinearConfig {
  double lambda = 1.0;
  int epochs = 200;
  double step = 1e-3;  // epoch e (1-based) uses step / sqrt(e)
  std::uint64_t seed = 0;
};

/// One-vs-rest linear classifier. Inputs are z-scored with the training
/// statistics stored in `mean` / `scale` before scoring.
struct LinearModel {
  std::size_t classes = 0;
  Matrix weights;             // classes x dims
  std::vector<double> bias;   // classes
  std::vector<double> mean, scale;
  std::vector<double> objective;  // per epoch, after the update

  std::size_t dims() const { return weights.cols(); }
  std::vector<double> scores(std::span<const double> x) const;
};

/// Full-batch subgradient descent on sum_c lambda/2 |w_c|^2 + mean hinge
/// loss of the class-c-vs-rest problem. The bias is not regularized.
LinearModel train_linear(const Matrix& features, std::span<const Label> labels,
                         const LinearConfig& config = {});

/// Objective of the current parameters on standardized training inputs.
double linear_objective(const LinearModel& model, const Matrix& features,
                        std::span<const Label> labels, double lambda);

struct SoftmaxConfig {
  std::size_t hidden = 64;
  int epochs = 15;
  double learning_rate = 0.1;  // decays linearly to 0 over all steps
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// input -> hidden (ReLU) -> softmax over classes. Flat parameters laid out
/// as W1 b1 W2 b2, weights row-major out x in.
struct SoftmaxModel {
  std::size_t inputs = 0, hidden = 0, classes = 0;
  std::vector<double> values;
  std::vector<double> mean, scale;

  std::size_t parameter_count() const { return hidden * inputs + hidden + classes * hidden + classes; }
  /// Class probabilities for one raw (unstandardized) input row.
  std::vector<double> probabilities(std::span<const double> x) const;
};

SoftmaxModel init_softmax(std::size_t inputs, std::size_t classes, const SoftmaxConfig& config);

/// Mean cross-entropy over `indices`, with its parameter gradient written to
/// `grad` when non-null. Inputs are standardized with the model's statistics.
double softmax_loss(const SoftmaxModel& model, const Matrix& features, std::span<const Label> labels,
                    std::span<const std::size_t> indices, std::vector<double>* grad);

/// Trains on `indices` (true and pseudo labels alike); every listed index
/// must be labeled. Standardization statistics come from the same rows.
SoftmaxModel train_softmax(const Matrix& features, const LabelVector& labels,
                           std::span<const std::size_t> indices, std::size_t classes,
                           const SoftmaxConfig& config = {});

/// Argmax per row, ties by lower class id.
LabelVector predict(const LinearModel& model, const Matrix& features, Exec exec = Exec::Parallel);
LabelVector predict(const SoftmaxModel& model, const Matrix& features, Exec exec = Exec::Parallel);

std::size_t argmax(std::span<const double> scores);

void save_linear(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_linear(const std::filesystem::path& path);
void save_softmax(const std::filesystem::path& path, const SoftmaxModel& model);
SoftmaxModel load_softmax(const std::filesystem::path& path);

}  // namespace epl
