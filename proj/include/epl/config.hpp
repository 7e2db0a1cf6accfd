#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "epl/contrastive.hpp"
#include "epl/dataset.hpp"
#include "epl/metrics.hpp"
#include "epl/probe.hpp"
#include "epl/projection.hpp"

namespace epl {

enum class Arm { SimCLR, SupCon, Combined };  // Combined = SimCLR fine-tuned with SupCon

std::string arm_name(Arm a);  // simclr | supcon | combined

/// --mode: `both` runs every arm an experiment defines, the others pick one.
enum class ArmSelection { SimCLR, SupCon, Both, Combined };

ArmSelection parse_arm_selection(const std::string& s);
std::string to_string(ArmSelection s);
bool selects(ArmSelection s, Arm a);

struct ExperimentConfig {
  std::filesystem::path data_path;  // empty: generate blobs
  BlobSpec blobs{.classes = 4, .per_class = 200, .dims = 16, .spread = 1.0, .center_dist = 20.0};
  std::string dataset_name = "blobs";
  SplitFractions fractions;
  std::uint64_t seed = 0;
  int replicas = 3;
  ArmSelection arms = ArmSelection::Both;
  bool standardize_inputs = true;
  TrainConfig train;
  ProjectionConfig projection;
  LinearConfig linear;
  SoftmaxConfig softmax;
  std::size_t knn_k = kDefaultNeighbours;
  std::filesystem::path out_dir = "out";

  /// Throws epl::Error naming the offending key.
  void validate() const;
  /// Resolved configuration in the same INI layout the loader accepts.
  std::string to_ini() const;
};

/// Flat INI with sections [data] [split] [experiment] [contrastive]
/// [projection] [linear] [softmax] [metrics]. Missing keys keep their
/// defaults; unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace epl
