#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epl/config.hpp"
#include "epl/dataset.hpp"

namespace epl {

inline constexpr const char* kVersion = "epl 0.1.0";

struct ResultRow {
  std::string dataset;
  std::string experiment;  // C1a C1b C2a C2b C2c C3a C3b C3c C3d
  std::string classifier;  // linear | opfsup | opfsemi | softmax
  std::uint64_t seed = 0;  // replica seed
  double accuracy = 0.0;
  double kappa = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// One C2 cell: visual separation of a projection next to the quality of
/// the labels propagated through it.
struct ConsistencyRow {
  std::string dataset;
  std::string arm;
  std::uint64_t seed = 0;
  double embedding_consistency = 0.0;  // knn_consistency of the 2D points, true labels
  double latent_consistency = 0.0;     // same on the latent features
  double propagation_accuracy = 0.0;
  double propagation_kappa = 0.0;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ExperimentOutcome {
  std::vector<ResultRow> rows;
  std::vector<ConsistencyRow> consistency;
  std::vector<std::string> failures;  // one line per failed arm or replica
  std::vector<StageTiming> timings;
  std::vector<std::uint64_t> replica_seeds;

  bool partial_failure() const { return !failures.empty(); }
};

enum class Experiment { C1, C2, C3 };

/// Replica r uses seed config.seed + r for its split and (through derived
/// streams) for every stochastic stage of every arm. Artifacts (embeddings,
/// scatter plots, encoder checkpoints) go to config.out_dir when it is
/// non-empty.
ExperimentOutcome run_experiments(const ExperimentConfig& config, const std::vector<Experiment>& which);

ExperimentOutcome run_c1(const ExperimentConfig& config);
ExperimentOutcome run_c2(const ExperimentConfig& config);
ExperimentOutcome run_c3(const ExperimentConfig& config);

/// The configured file (must carry labels) or freshly generated blobs.
Dataset load_dataset(const ExperimentConfig& config);

std::string experiment_code(Experiment e, std::optional<Arm> arm);  // "C1a", "C3a" (baseline) ...

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);
void write_consistency_csv(const std::filesystem::path& path, const std::vector<ConsistencyRow>& rows);
std::vector<ConsistencyRow> read_consistency_csv(const std::filesystem::path& path);

struct Aggregate {
  std::string dataset, experiment, classifier;
  std::size_t count = 0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double kappa_mean = 0.0, kappa_std = 0.0;
};

/// Mean and sample standard deviation (0 for a single replica) per
/// (dataset, experiment, classifier), in first-appearance order.
std::vector<Aggregate> aggregate(const std::vector<ResultRow>& rows);
std::string format_aggregates(const std::vector<Aggregate>& aggs);

struct CorrelationReport {
  std::size_t cells = 0;
  std::optional<double> vs_vs_propagation;  // Spearman rho; nullopt when a series is constant
  std::optional<double> vs_vs_classifier;
  std::string describe() const;
};

/// Cells are (dataset, arm) pairs averaged over replicas. The classifier
/// kappa of a cell is its C3 softmax row. Needs at least 5 cells.
CorrelationReport correlation_report(const std::vector<ResultRow>& rows,
                                     const std::vector<ConsistencyRow>& consistency);

std::string sha256_file(const std::filesystem::path& path);

/// manifest.txt: version, resolved config, seeds, stage timings, failures
/// and the SHA-256 of every other file under `dir`.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const ExperimentOutcome& outcome);

/// results.csv, consistency.csv and summary.csv into `dir`, then the
/// manifest (written last so it can digest the others).
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const ExperimentOutcome& outcome);

/// Pseudo-label files: node,label,provenance (T or P).
void write_labels_csv(const std::filesystem::path& path, const LabelVector& labels,
                      std::span<const std::size_t> node_ids = {});
LabelVector read_labels_csv(const std::filesystem::path& path, std::size_t n);

}  // namespace epl
