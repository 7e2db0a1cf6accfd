#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "epl/contrastive.hpp"

namespace epl {

enum class ModelKind : std::uint32_t { Encoder = 1, Linear = 2, Softmax = 3 };

/// Binary layout, little-endian:
///   "EPLCKPT1" | u32 kind | u32 shape_count | u32 shape[shape_count]
///   | u64 value_count | f64 values[value_count]
struct Checkpoint {
  ModelKind kind = ModelKind::Encoder;
  std::vector<std::uint32_t> shape;
  std::vector<double> values;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Sidecar text manifest written next to a checkpoint.
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

void save_encoder(const std::filesystem::path& path, const EncoderParams& params,
                  const std::string& manifest_text);
EncoderParams load_encoder(const std::filesystem::path& path);

}  // namespace epl
