#include "epl/opf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace epl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void check_finite(const Matrix& m, const char* who) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw Error(std::string(who) + ": non-finite feature value");
  }
}

}  // namespace

OptimumPathForest opfsemi_propagate(const Matrix& features, const LabelVector& seeds, Exec exec) {
  const std::size_t n = features.rows();
  if (seeds.size() != n) throw Error("opfsemi_propagate: seed vector length does not match features");
  check_finite(features, "opfsemi_propagate");

  OptimumPathForest f;
  f.cost.assign(n, kInf);
  f.predecessor.assign(n, kNoPredecessor);
  f.root.resize(n);
  f.label.assign(n, kUnlabeled);
  std::size_t seed_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f.root[i] = i;
    if (seeds.labeled(i)) {
      f.cost[i] = 0.0;
      f.label[i] = seeds.values[i];
      ++seed_count;
    }
  }
  if (seed_count == 0) throw Error("opfsemi_propagate: no seeds");

  std::vector<char> done(n, 0);
  const auto count = static_cast<std::ptrdiff_t>(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t s = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && (s == n || f.cost[i] < f.cost[s])) s = i;
    }
    done[s] = 1;
    const double cs = f.cost[s];
    auto relax = [&](std::ptrdiff_t ti) {
      const auto t = static_cast<std::size_t>(ti);
      if (done[t]) return;
      const double offer = std::max(cs, euclidean(features.row(s), features.row(t)));
      if (offer < f.cost[t]) {
        f.cost[t] = offer;
        f.predecessor[t] = s;
        f.root[t] = f.root[s];
        f.label[t] = f.label[s];
      }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) if (n >= 1024)
      for (std::ptrdiff_t t = 0; t < count; ++t) relax(t);
    } else {
      for (std::ptrdiff_t t = 0; t < count; ++t) relax(t);
    }
  }
  return f;
}

LabelVector forest_labels(const OptimumPathForest& forest, const LabelVector& seeds) {
  LabelVector out(forest.size());
  for (std::size_t i = 0; i < forest.size(); ++i) {
    out.set(i, forest.label[i], seeds.labeled(i) ? Provenance::True : Provenance::Pseudo);
  }
  return out;
}

void write_forest_csv(const OptimumPathForest& forest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "node,cost,pred,root,label\n";
  for (std::size_t i = 0; i < forest.size(); ++i) {
    out << i << ',' << forest.cost[i] << ',';
    if (forest.predecessor[i] == kNoPredecessor) out << -1;
    else out << forest.predecessor[i];
    out << ',' << forest.root[i] << ',' << forest.label[i] << '\n';
  }
}

MinimaxResult minimax_oracle(const Matrix& features, const LabelVector& seeds) {
  const std::size_t n = features.rows();
  if (n > kOracleMaxNodes) throw Error("minimax_oracle: at most 64 nodes");
  if (seeds.size() != n) throw Error("minimax_oracle: seed vector length does not match features");

  MinimaxResult r;
  r.all_pairs = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) r.all_pairs(i, j) = i == j ? 0.0 : euclidean(features.row(i), features.row(j));
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double via = std::max(r.all_pairs(i, k), r.all_pairs(k, j));
        if (via < r.all_pairs(i, j)) r.all_pairs(i, j) = via;
      }
    }
  }

  std::vector<std::size_t> seed_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (seeds.labeled(i)) seed_idx.push_back(i);
  }
  if (seed_idx.empty()) throw Error("minimax_oracle: no seeds");

  r.costs.assign(n, kInf);
  for (std::size_t x = 0; x < n; ++x) {
    for (auto s : seed_idx) r.costs[x] = std::min(r.costs[x], r.all_pairs(s, x));
  }

  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) edges.push_back({a, b, euclidean(features.row(a), features.row(b))});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  std::vector<std::size_t> parent(n), seed_of(n, kNoPredecessor);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (auto s : seed_idx) seed_of[s] = s;
  for (const auto& e : edges) {
    const auto ra = find_root(parent, e.a);
    const auto rb = find_root(parent, e.b);
    if (ra == rb) continue;
    if (seed_of[ra] != kNoPredecessor && seed_of[rb] != kNoPredecessor) continue;
    parent[rb] = ra;
    if (seed_of[ra] == kNoPredecessor) seed_of[ra] = seed_of[rb];
  }
  r.owner.resize(n);
  r.labels.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    r.owner[x] = seed_of[find_root(parent, x)];
    r.labels[x] = seeds.values[r.owner[x]];
  }
  return r;
}

std::vector<Edge> mst(const Matrix& features) {
  const std::size_t n = features.rows();
  if (n < 2) throw Error("mst: need at least 2 nodes");
  struct Best {
    double w = kInf;
    std::size_t a = kNoPredecessor, b = kNoPredecessor;
  };
  auto less = [](const Best& x, const Best& y) {
    if (x.w != y.w) return x.w < y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  };
  std::vector<Best> best(n);
  std::vector<char> in_tree(n, 0);
  std::vector<Edge> out;
  out.reserve(n - 1);
  std::size_t last = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      Best cand{euclidean(features.row(last), features.row(v)), std::min(last, v), std::max(last, v)};
      if (less(cand, best[v])) best[v] = cand;
    }
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (pick == n || less(best[v], best[pick]))) pick = v;
    }
    in_tree[pick] = 1;
    out.push_back({best[pick].a, best[pick].b, best[pick].w});
    last = pick;
  }
  return out;
}

std::size_t OpfSupModel::prototype_count() const {
  return static_cast<std::size_t>(std::count(prototype.begin(), prototype.end(), true));
}

OpfSupModel opfsup_train(const Matrix& features, std::span<const Label> labels) {
  const std::size_t n = features.rows();
  if (labels.size() != n) throw Error("opfsup_train: label count does not match features");
  if (n < 2) throw Error("opfsup_train: need at least 2 training samples");
  if (std::all_of(labels.begin(), labels.end(), [&](Label l) { return l == labels[0]; })) {
    throw Error("opfsup_train: training set has a single class");
  }
  OpfSupModel m;
  m.features = features;
  m.labels.assign(labels.begin(), labels.end());
  m.prototype.assign(n, false);
  for (const auto& e : mst(features)) {
    if (labels[e.a] != labels[e.b]) m.prototype[e.a] = m.prototype[e.b] = true;
  }
  LabelVector seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (m.prototype[i]) seeds.set(i, labels[i], Provenance::True);
  }
  m.forest = opfsemi_propagate(features, seeds, Exec::Serial);
  m.by_cost.resize(n);
  std::iota(m.by_cost.begin(), m.by_cost.end(), std::size_t{0});
  std::stable_sort(m.by_cost.begin(), m.by_cost.end(),
                   [&](auto a, auto b) { return m.forest.cost[a] < m.forest.cost[b]; });
  return m;
}

Label opfsup_classify(const OpfSupModel& model, std::span<const double> x) {
  if (x.size() != model.dims()) throw Error("opfsup_classify: dimension mismatch");
  double best = kInf;
  std::size_t winner = kNoPredecessor;
  for (auto s : model.by_cost) {
    const double cs = model.forest.cost[s];
    if (cs > best) break;  // later nodes cannot offer less
    const double offer = std::max(cs, euclidean(model.features.row(s), x));
    if (offer < best || (offer == best && s < winner)) {
      best = offer;
      winner = s;
    }
  }
  return model.forest.label[winner];
}

LabelVector opfsup_classify(const OpfSupModel& model, const Matrix& xs, Exec exec) {
  if (xs.cols() != model.dims()) throw Error("opfsup_classify: dimension mismatch");
  LabelVector out(xs.rows());
  const auto count = static_cast<std::ptrdiff_t>(xs.rows());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      out.values[static_cast<std::size_t>(i)] = opfsup_classify(model, xs.row(static_cast<std::size_t>(i)));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      out.values[static_cast<std::size_t>(i)] = opfsup_classify(model, xs.row(static_cast<std::size_t>(i)));
    }
  }
  return out;
}

}  // namespace epl
