#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "epl/common.hpp"

namespace epl {

/// Feature matrix with optional ground-truth labels in [0, class_count).
struct Dataset {
  Matrix features;
  std::vector<Label> labels;  // empty when the dataset is unlabeled
  int class_count = 0;
  std::string name;

  std::size_t size() const { return features.rows(); }
  std::size_t dims() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws unless n >= 2, d >= 1, labels in range and all values finite.
  void validate() const;
};

enum class FileFormat { DelimitedText, RawBinary };

/// Picks RawBinary for ".bin", DelimitedText otherwise.
FileFormat format_for_path(const std::filesystem::path& path);

Dataset load_features(const std::filesystem::path& path, FileFormat format);
void save_features(const Dataset& data, const std::filesystem::path& path, FileFormat format);

struct BlobSpec {
  int classes = 4;
  int per_class = 100;
  int dims = 2;
  double spread = 1.0;
  double center_dist = 10.0;
  std::uint64_t seed = 0;
  int max_attempts = 2000;  // placement attempts per center before giving up
};

/// Isotropic Gaussian clusters whose centers are mutually >= center_dist apart.
Dataset generate_blobs(const BlobSpec& spec);

enum class Role : std::uint8_t { Supervised, Unsupervised, Test };

char role_code(Role r);
Role role_from_code(char c);

struct SplitFractions {
  double supervised = 0.01;
  double unsupervised = 0.69;
  double test = 0.30;
};

struct SplitAssignment {
  std::vector<Role> roles;
  std::uint64_t seed = 0;
  SplitFractions fractions;

  std::vector<std::size_t> indices(Role r) const;
  std::vector<std::size_t> indices(std::initializer_list<Role> rs) const;
  std::size_t count(Role r) const;

  bool operator==(const SplitAssignment& o) const { return roles == o.roles && seed == o.seed; }
};

/// Seeded stratified S/U/T partition. Test and supervised totals are fixed
/// globally (round-half-up and ceil) and apportioned over classes by largest
/// remainder; every class gets at least one supervised sample.
SplitAssignment stratified_split(const Dataset& data, SplitFractions fractions, std::uint64_t seed);

void save_split(const SplitAssignment& split, const std::filesystem::path& path);
SplitAssignment load_split(const std::filesystem::path& path);

/// Combined S u U labels: true labels on S, pseudo-labels on U, Test left
/// unlabeled.
LabelVector merge_labels(const SplitAssignment& split, const LabelVector& true_s,
                         const LabelVector& pseudo_u);

/// Z-scores every column with statistics of `reference_rows` (all rows when
/// empty). Columns with zero spread are only centered.
void standardize(Matrix& m, std::span<const std::size_t> reference_rows = {});

}  // namespace epl
