#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epl/common.hpp"
#include "epl/dataset.hpp"
#include "epl/kernels.hpp"

namespace epl {

/// Layer widths: input -> hidden (ReLU) -> latent, then the projection head
/// latent -> head_hidden (ReLU) -> head_out (L2-normalized). The latent layer
/// is the extracted feature space; the head only feeds the losses.
struct EncoderShape {
  std::size_t input = 0;
  std::size_t hidden = 64;
  std::size_t latent = 32;
  std::size_t head_hidden = 32;
  std::size_t head_out = 16;

  std::size_t parameter_count() const;
  bool operator==(const EncoderShape&) const = default;
};

/// Flat parameter vector laid out as W1 b1 W2 b2 W3 b3 W4 b4 (weights
/// row-major, out x in).
struct EncoderParams {
  EncoderShape shape;
  std::vector<double> values;

  EncoderParams() = default;
  explicit EncoderParams(EncoderShape s) : shape(s), values(s.parameter_count(), 0.0) {}

  struct Layer {
    std::size_t weights;  // offset of the out x in weight block
    std::size_t bias;     // offset of the bias block
    std::size_t in, out;
  };
  Layer layer(int index) const;  // 0..3

  /// Uniform He-style fan-in initialisation.
  static EncoderParams scratch(EncoderShape shape, std::uint64_t seed);

  bool operator==(const EncoderParams&) const = default;
};

struct Encoded {
  std::vector<double> latent;
  std::vector<double> head;  // unit norm; e_1 when the raw head output is ~0
};

Encoded encode(const EncoderParams& params, std::span<const double> x);

/// Latent rows for `indices` (all rows when empty), order preserved.
Matrix extract_features(const EncoderParams& params, const Matrix& features,
                        std::span<const std::size_t> indices = {}, Exec exec = Exec::Parallel);

struct AugmentStrength {
  double noise = 0.1;    // noise sigma as a multiple of each feature's scale
  double dropout = 0.1;  // per-coordinate zeroing probability
};

/// x + N(0, (noise * scale_j)^2) per coordinate, then each coordinate zeroed
/// with probability `dropout`.
std::vector<double> augment(std::span<const double> x, const AugmentStrength& strength,
                            std::span<const double> feature_scale, Rng& rng);

/// Two views per source sample: rows [0, B) are first views, rows [B, 2B)
/// their partners in the same order.
struct ViewBatch {
  Matrix views;
  std::vector<std::size_t> source;
  std::vector<Label> labels;  // empty when unlabeled

  std::size_t pairs() const { return views.rows() / 2; }
  std::size_t partner(std::size_t i) const { return (i + pairs()) % views.rows(); }
};

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // dLoss / d(head output), same shape as the input
};

/// NT-Xent over 2B unit-norm head outputs laid out as in ViewBatch, averaged
/// over all 2B anchors.
LossResult ntxent_loss(const Matrix& z, double temperature);

/// Supervised contrastive loss; positives of an anchor are all other views
/// with its label. Averaged over anchors.
LossResult supcon_loss(const Matrix& z, std::span<const Label> labels, double temperature);

enum class ContrastiveMode { SimCLR, SupCon };

std::string to_string(ContrastiveMode m);

enum class InitMode { Scratch, WarmStart };

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 64;
  double temperature = 0.07;
  double learning_rate = 5e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double min_learning_rate = 5e-4 / 50.0;
  InitMode init = InitMode::Scratch;
  std::filesystem::path warm_start_checkpoint;
  double validation_fraction = 0.1;
  AugmentStrength augmentation;
  EncoderShape shape;  // input width is taken from the data
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe() const;
};

struct ParamGradient {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as EncoderParams::values
};

/// Loss of one view batch and its gradient with respect to every encoder and
/// head parameter.
ParamGradient batch_gradient(ContrastiveMode mode, const EncoderParams& params,
                             const ViewBatch& batch, double temperature, Exec exec = Exec::Parallel);

struct TrainResult {
  EncoderParams params;             // checkpoint with the lowest validation loss
  std::vector<double> train_loss;   // mean batch loss per epoch
  std::vector<double> val_loss;     // per epoch
  int best_epoch = 0;               // 1-based, 0 when no epoch ran
  bool validation_on_training_set = false;
};

/// Trains on `indices` of `features`. SupCon needs `labels` on every index.
/// `init` overrides the configured initialisation (used for fine-tuning).
TrainResult train_contrastive(ContrastiveMode mode, const Matrix& features,
                              std::span<const Label> labels, std::span<const std::size_t> indices,
                              const TrainConfig& config,
                              const std::optional<EncoderParams>& init = std::nullopt,
                              Exec exec = Exec::Parallel);

/// SimCLR trains on S u U without labels; SupCon on S with labels.
TrainResult train(ContrastiveMode mode, const Dataset& data, const SplitAssignment& split,
                  const TrainConfig& config, Exec exec = Exec::Parallel);

/// SupCon on S starting from `params` (the SimCLR+SupCon combination).
TrainResult finetune_supcon(const EncoderParams& params, const Dataset& data,
                            const SplitAssignment& split, const TrainConfig& config,
                            Exec exec = Exec::Parallel);

/// Mean loss over fixed augmented views of `indices` (views drawn from
/// `view_seed`), in batches of config.batch_size.
double evaluate_loss(ContrastiveMode mode, const EncoderParams& params, const Matrix& features,
                     std::span<const Label> labels, std::span<const std::size_t> indices,
                     const TrainConfig& config, std::uint64_t view_seed, Exec exec = Exec::Parallel);

/// Per-feature standard deviation over `indices` (1 where it is zero).
std::vector<double> feature_scale(const Matrix& features, std::span<const std::size_t> indices);

}  // namespace epl
