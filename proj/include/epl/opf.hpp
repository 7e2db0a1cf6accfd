#pragma once

#include <filesystem>
#include <limits>
#include <vector>

#include "epl/common.hpp"
#include "epl/kernels.hpp"

namespace epl {

inline constexpr std::size_t kNoPredecessor = std::numeric_limits<std::size_t>::max();

/// Optimum-path forest over the complete Euclidean graph with the fmax path
/// cost (largest edge on the path). Seeds are roots with cost 0.
struct OptimumPathForest {
  std::vector<double> cost;
  std::vector<std::size_t> predecessor;  // kNoPredecessor for roots
  std::vector<std::size_t> root;
  std::vector<Label> label;

  std::size_t size() const { return cost.size(); }
};

/// OPFSemi label propagation. `seeds` is labeled exactly on the seed set.
///
/// Nodes are finalized in order of increasing cost (ties: lower index); a
/// finalized node s offers max(cost(s), |x_s - x_t|) to every open node t,
/// which adopts the offer only when it is strictly cheaper. The relaxation
/// sweep is the parallel part; extraction order is fixed.
OptimumPathForest opfsemi_propagate(const Matrix& features, const LabelVector& seeds,
                                    Exec exec = Exec::Parallel);

/// Pseudo-labels from a propagated forest, with Pseudo provenance on every
/// non-seed node.
LabelVector forest_labels(const OptimumPathForest& forest, const LabelVector& seeds);

void write_forest_csv(const OptimumPathForest& forest, const std::filesystem::path& path);

struct MinimaxResult {
  std::vector<Label> labels;
  std::vector<double> costs;
  std::vector<std::size_t> owner;  // seed index owning each node
  Matrix all_pairs;                // minimax distance between every node pair
};

inline constexpr std::size_t kOracleMaxNodes = 64;

/// Brute-force reference for OPFSemi on small graphs (n <= 64, O(n^3)).
/// Costs come from a (max, min) Floyd-Warshall closure over all pairs. Each
/// node belongs to the seed it joins in the minimum spanning forest where
/// no component may hold two seeds (Kruskal, edges ordered by weight then
/// index); with distinct edge weights that seed attains the node's minimax
/// cost and is the root OPFSemi reaches.
MinimaxResult minimax_oracle(const Matrix& features, const LabelVector& seeds);

struct Edge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;
};

/// Minimum spanning tree of the complete Euclidean graph, unique under the
/// total order (weight, a, b). Edges are returned in the order Prim adds them.
std::vector<Edge> mst(const Matrix& features);

/// Supervised OPF classifier: prototypes are the endpoints of MST edges
/// joining different classes; the training forest is grown from them.
struct OpfSupModel {
  Matrix features;
  std::vector<Label> labels;          // training labels
  std::vector<bool> prototype;
  OptimumPathForest forest;
  std::vector<std::size_t> by_cost;   // training nodes ordered by (cost, index)

  std::size_t dims() const { return features.cols(); }
  std::size_t prototype_count() const;
};

OpfSupModel opfsup_train(const Matrix& features, std::span<const Label> labels);

/// Label of argmin_s max(cost(s), |x_s - x|), ties by lower training index.
Label opfsup_classify(const OpfSupModel& model, std::span<const double> x);

LabelVector opfsup_classify(const OpfSupModel& model, const Matrix& xs, Exec exec = Exec::Parallel);

}  // namespace epl
