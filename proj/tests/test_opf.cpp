#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "epl/opf.hpp"
#include "support.hpp"

using namespace epl;

namespace {

Matrix line(std::initializer_list<double> xs) {
  Matrix m(xs.size(), 1);
  std::size_t i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

LabelVector seeds_at(std::size_t n, std::initializer_list<std::pair<std::size_t, Label>> s) {
  LabelVector v(n);
  for (auto [i, l] : s) v.set(i, l, Provenance::True);
  return v;
}

struct Instance {
  Matrix x;
  LabelVector seeds;
};

Instance random_instance(Rng& rng, std::size_t max_n = 12) {
  const std::size_t n = 2 + rng.index(max_n - 1);
  const std::size_t d = 1 + rng.index(4);
  Instance inst{test::random_matrix(n, d, rng), LabelVector(n)};
  const std::size_t classes = 1 + rng.index(4);
  const std::size_t seeds = 1 + rng.index(std::min<std::size_t>(n, 4));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  for (std::size_t s = 0; s < seeds; ++s) {
    inst.seeds.set(order[s], static_cast<Label>(s < classes ? s : rng.index(classes)), Provenance::True);
  }
  return inst;
}

// Largest edge on the tree path between every pair, by a walk from each node.
Matrix tree_bottlenecks(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    adj[e.a].push_back({e.b, e.weight});
    adj[e.b].push_back({e.a, e.weight});
  }
  Matrix out(n, n);
  for (std::size_t src = 0; src < n; ++src) {
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t u, std::size_t from, double worst) {
      out(src, u) = worst;
      for (auto [v, w] : adj[u]) {
        if (v != from) walk(v, u, std::max(worst, w));
      }
    };
    walk(src, n, 0.0);
  }
  return out;
}

void check_forest(const OptimumPathForest& f, const Matrix& x, const LabelVector& seeds) {
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (seeds.labeled(i)) {
      CHECK(f.cost[i] == 0.0);
      CHECK(f.predecessor[i] == kNoPredecessor);
      CHECK(f.root[i] == i);
      CHECK(f.label[i] == seeds.values[i]);
      continue;
    }
    const auto p = f.predecessor[i];
    REQUIRE(p < n);
    CHECK(f.cost[i] == std::max(f.cost[p], euclidean(x.row(p), x.row(i))));
    CHECK(f.label[i] == f.label[f.root[i]]);
    std::size_t hop = i, steps = 0;
    while (f.predecessor[hop] != kNoPredecessor && steps <= n) {
      hop = f.predecessor[hop];
      ++steps;
    }
    CHECK(steps <= n);
    CHECK(hop == f.root[i]);
    CHECK(seeds.labeled(hop));
  }
}

}  // namespace

TEST_SUITE("opf") {

TEST_CASE("1-D example: {0,3,7,10} with seeds at both ends") {
  const auto x = line({0, 3, 7, 10});
  const auto f = opfsemi_propagate(x, seeds_at(4, {{0, 0}, {3, 1}}));
  CHECK(f.label == std::vector<Label>{0, 0, 1, 1});
  CHECK(f.cost[1] == 3.0);
  CHECK(f.cost[2] == 3.0);
}

TEST_CASE("single seed labels everything at its minimax distance") {
  Rng rng(3);
  const auto x = test::random_matrix(10, 3, rng);
  const auto seeds = seeds_at(10, {{4, 2}});
  const auto f = opfsemi_propagate(x, seeds);
  const auto o = minimax_oracle(x, seeds);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(f.label[i] == 2);
    CHECK(std::abs(f.cost[i] - o.all_pairs(4, i)) <= 1e-12);
  }
}

TEST_CASE("exact tie goes to the seed whose path reached the node first") {
  // Node 1 sits midway between seeds 0 and 2; seed 0 is extracted first.
  const auto f = opfsemi_propagate(line({0, 1, 2}), seeds_at(3, {{0, 0}, {2, 1}}));
  CHECK(f.label[1] == 0);
  CHECK(f.root[1] == 0);
}

TEST_CASE("propagation errors") {
  CHECK_THROWS_AS(opfsemi_propagate(line({0, 1}), LabelVector(2)), Error);
  CHECK_THROWS_AS(opfsemi_propagate(line({0, 1}), LabelVector(3)), Error);
}

TEST_CASE("duplicate points inherit the parent's cost") {
  const auto f = opfsemi_propagate(line({0, 2, 2}), seeds_at(3, {{0, 0}}));
  CHECK(f.cost[1] == 2.0);
  CHECK(f.cost[2] == 2.0);
}

TEST_CASE("oracle examples") {
  const auto o = minimax_oracle(line({0, 5}), seeds_at(2, {{0, 0}}));
  CHECK(o.costs[1] == 5.0);
  // Triangle a-b = 1, b-c = 2, a-c = 3.
  Matrix tri(3, 2);
  tri(1, 0) = 1.0;
  const double cx = 1.0 + 2.0 * (-1.0 / 4.0), cy = 2.0 * std::sqrt(1.0 - 1.0 / 16.0);
  tri(2, 0) = cx;
  tri(2, 1) = cy;
  REQUIRE(std::abs(euclidean(tri.row(0), tri.row(2)) - std::sqrt(cx * cx + cy * cy)) < 1e-15);
  const auto t = minimax_oracle(tri, seeds_at(3, {{0, 0}}));
  CHECK(t.all_pairs(0, 2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(minimax_oracle(Matrix(kOracleMaxNodes + 1, 1), seeds_at(kOracleMaxNodes + 1, {{0, 0}})), Error);
}

TEST_CASE("propagation equals the brute-force oracle and yields a valid forest") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = random_instance(rng);
    const auto f = opfsemi_propagate(inst.x, inst.seeds);
    const auto o = minimax_oracle(inst.x, inst.seeds);
    CAPTURE(trial);
    CHECK(f.label == o.labels);
    for (std::size_t i = 0; i < inst.x.rows(); ++i) CHECK(std::abs(f.cost[i] - o.costs[i]) <= 1e-12);
    check_forest(f, inst.x, inst.seeds);
    // Serial and OpenMP relaxation agree bit for bit.
    const auto s = opfsemi_propagate(inst.x, inst.seeds, Exec::Serial);
    CHECK(test::bitwise_equal(s.cost, f.cost));
    CHECK(s.predecessor == f.predecessor);
  }
}

TEST_CASE("mst examples and brute-force optimality") {
  const auto e = mst(line({0, 1, 2}));
  REQUIRE(e.size() == 2);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& ed : e) pairs.push_back({ed.a, ed.b});
  std::sort(pairs.begin(), pairs.end());
  CHECK(pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});

  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.index(6);
    const auto x = test::random_matrix(n, 2, rng);
    std::vector<Edge> all;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) all.push_back({a, b, euclidean(x.row(a), x.row(b))});
    }
    // Every (n-1)-subset of edges that connects the graph is a spanning tree.
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> pick(all.size(), false);
    std::fill(pick.end() - static_cast<long>(n - 1), pick.end(), true);
    do {
      std::vector<std::size_t> comp(n);
      std::iota(comp.begin(), comp.end(), 0);
      std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        return comp[v] == v ? v : comp[v] = find(comp[v]);
      };
      double w = 0.0;
      std::size_t joined = 0;
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (!pick[i]) continue;
        const auto ra = find(all[i].a), rb = find(all[i].b);
        if (ra != rb) {
          comp[ra] = rb;
          ++joined;
        }
        w += all[i].weight;
      }
      if (joined == n - 1) best = std::min(best, w);
    } while (std::next_permutation(pick.begin(), pick.end()));
    const auto tree = mst(x);
    REQUIRE(tree.size() == n - 1);
    double total = 0.0;
    for (const auto& ed : tree) total += ed.weight;
    CHECK(std::abs(total - best) <= 1e-12 * std::max(1.0, best));
  }
}

TEST_CASE("minimax distance is the largest edge on the MST path") {
  Rng rng(55);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = random_instance(rng);
    const std::size_t n = inst.x.rows();
    const auto o = minimax_oracle(inst.x, inst.seeds);
    const auto paths = tree_bottlenecks(n, mst(inst.x));
    const auto f = opfsemi_propagate(inst.x, inst.seeds);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) CHECK(std::abs(o.all_pairs(a, b) - paths(a, b)) <= 1e-12);
      double via_tree = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < n; ++s) {
        if (inst.seeds.labeled(s)) via_tree = std::min(via_tree, paths(s, a));
      }
      CHECK(std::abs(f.cost[a] - via_tree) <= 1e-12);
    }
  }
}

TEST_CASE("scaling features scales costs and keeps labels") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    const auto f = opfsemi_propagate(inst.x, inst.seeds);
    const double c = std::pow(2.0, static_cast<double>(rng.index(9)) - 4.0);  // exact in binary
    for (auto& v : inst.x.values()) v *= c;
    const auto g = opfsemi_propagate(inst.x, inst.seeds);
    CHECK(g.label == f.label);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(g.cost[i] - c * f.cost[i]) <= 1e-12 * std::max(1.0, g.cost[i]));
  }
}

TEST_CASE("adding a seed never raises a cost") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = random_instance(rng);
    const auto before = opfsemi_propagate(inst.x, inst.seeds);
    std::size_t extra = rng.index(inst.x.rows());
    inst.seeds.set(extra, 0, Provenance::True);
    const auto after = opfsemi_propagate(inst.x, inst.seeds);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after.cost[i] <= before.cost[i]);
  }
}

TEST_CASE("forest_labels marks propagated nodes as pseudo") {
  const auto seeds = seeds_at(3, {{0, 1}});
  const auto l = forest_labels(opfsemi_propagate(line({0, 1, 2}), seeds), seeds);
  CHECK(l.values == std::vector<Label>{1, 1, 1});
  CHECK(l.provenance[0] == Provenance::True);
  CHECK(l.provenance[2] == Provenance::Pseudo);
}

TEST_CASE("OPFSup: two blobs give two prototypes, training set is recovered") {
  const auto d = generate_blobs({.classes = 2, .per_class = 30, .dims = 2, .spread = 0.5, .center_dist = 20, .seed = 4});
  const auto model = opfsup_train(d.features, d.labels);
  CHECK(model.prototype_count() == 2);
  // The two prototypes are the endpoints of the single cross-class MST edge.
  std::size_t cross = 0;
  for (const auto& e : mst(d.features)) {
    if (d.labels[e.a] != d.labels[e.b]) {
      ++cross;
      CHECK(model.prototype[e.a]);
      CHECK(model.prototype[e.b]);
    }
  }
  CHECK(cross == 1);
  const auto pred = opfsup_classify(model, d.features);
  CHECK(pred.values == d.labels);
}

TEST_CASE("OPFSup: forest invariants, self-classification and ties") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.index(30);
    const auto x = test::random_matrix(n, 2, rng);
    std::vector<Label> labels(n);
    for (auto& l : labels) l = static_cast<Label>(rng.index(3));
    labels[0] = 0;
    labels[1] = 1;
    const auto model = opfsup_train(x, labels);
    LabelVector proto(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (model.prototype[i]) proto.set(i, labels[i], Provenance::True);
    }
    check_forest(model.forest, x, proto);
    for (std::size_t i = 0; i < n; ++i) CHECK(opfsup_classify(model, x.row(i)) == model.forest.label[i]);
  }
  CHECK_THROWS_AS(opfsup_train(line({0, 1, 2}), std::vector<Label>{1, 1, 1}), Error);
  const auto model = opfsup_train(line({0, 1, 10, 11}), std::vector<Label>{0, 0, 1, 1});
  CHECK(opfsup_classify(model, std::vector<double>{0.2}) == 0);
  CHECK_THROWS_AS(opfsup_classify(model, std::vector<double>{0.2, 1.0}), Error);
  // Equidistant from two zero-cost prototypes: the lower index wins.
  const auto pair = opfsup_train(line({0, 2}), std::vector<Label>{1, 0});
  CHECK(opfsup_classify(pair, std::vector<double>{1.0}) == 1);
}

}  // TEST_SUITE
