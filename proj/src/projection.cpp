#include "epl/projection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace epl {
namespace {

constexpr int kBracketSteps = 64;
constexpr int kBisectionSteps = 200;
constexpr std::size_t kKlTail = 50;

struct RowFit {
  double perplexity;
  double beta;
};

// Perplexity of exp(-beta * (d - d_min)) over the off-diagonal entries.
double kernel_perplexity(std::span<const double> d, std::size_t self, double d_min, double beta) {
  double sum = 0.0, weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j == self) continue;
    const double shifted = d[j] - d_min;
    const double p = std::exp(-beta * shifted);
    sum += p;
    weighted += shifted * p;
  }
  return std::exp(std::log(sum) + beta * weighted / sum);
}

void fit_row(std::span<const double> d, std::size_t self, double target, double tol,
             std::span<double> out) {
  const std::size_t n = d.size();
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = -d_min;
  double d_mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == self) continue;
    d_min = std::min(d_min, d[j]);
    d_max = std::max(d_max, d[j]);
    d_mean += d[j];
  }
  d_mean /= static_cast<double>(n - 1);

  if (d_max - d_min <= 1e-15 * std::max(1.0, d_max)) {
    for (std::size_t j = 0; j < n; ++j) out[j] = j == self ? 0.0 : 1.0 / static_cast<double>(n - 1);
    return;
  }

  double lo = 0.0;
  double hi = 1.0 / std::max(d_mean - d_min, 1e-300);
  int steps = 0;
  while (kernel_perplexity(d, self, d_min, hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (++steps > kBracketSteps) {
      throw Error("pairwise_affinities: row " + std::to_string(self) +
                  " cannot reach the target perplexity");
    }
  }
  if (kernel_perplexity(d, self, d_min, 0.0) < target - tol) {
    throw Error("pairwise_affinities: row " + std::to_string(self) +
                " cannot reach the target perplexity");
  }

  double beta = hi;
  double perp = kernel_perplexity(d, self, d_min, beta);
  for (int it = 0; it < kBisectionSteps && std::abs(perp - target) > tol; ++it) {
    beta = 0.5 * (lo + hi);
    perp = kernel_perplexity(d, self, d_min, beta);
    if (perp > target) lo = beta;
    else hi = beta;
  }
  if (std::abs(perp - target) > tol) {
    throw Error("pairwise_affinities: bisection did not converge on row " + std::to_string(self));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = j == self ? 0.0 : std::exp(-beta * (d[j] - d_min));
    sum += out[j];
  }
  for (auto& v : out) v /= sum;
}

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void ProjectionConfig::validate(std::size_t n) const {
  if (n < 4) throw Error("t-SNE needs at least 4 points");
  if (!(perplexity > 1.0)) throw Error("t-SNE perplexity must exceed 1");
  if (!(perplexity < static_cast<double>(n))) {
    throw Error("t-SNE perplexity " + fmt(perplexity) + " must be below n = " + std::to_string(n));
  }
  if (iterations < 1) throw Error("t-SNE needs at least one iteration");
  if (!(learning_rate > 0.0 && early_exaggeration > 0.0 && init_sigma > 0.0 && entropy_tolerance > 0.0)) {
    throw Error("t-SNE rates must be positive");
  }
}

std::string ProjectionConfig::describe() const {
  std::ostringstream s;
  s << "perplexity=" << fmt(perplexity) << " iterations=" << iterations
    << " learning_rate=" << fmt(learning_rate) << " early_exaggeration=" << fmt(early_exaggeration)
    << " exaggeration_iterations=" << exaggeration_iterations
    << " momentum=" << fmt(initial_momentum) << "->" << fmt(final_momentum) << "@" << momentum_switch
    << " init=random-gaussian(sigma=" << fmt(init_sigma) << ") min_gain=" << fmt(min_gain)
    << " entropy_tolerance=" << fmt(entropy_tolerance) << " seed=" << seed;
  return s.str();
}

double row_perplexity(std::span<const double> conditional, std::size_t self) {
  double h = 0.0;
  for (std::size_t j = 0; j < conditional.size(); ++j) {
    if (j == self || conditional[j] <= 0.0) continue;
    h -= conditional[j] * std::log2(conditional[j]);
  }
  return std::exp2(h);
}

Matrix conditional_affinities(const Matrix& features, double perplexity, double tol, Exec exec) {
  const std::size_t n = features.rows();
  if (n < 3) throw Error("pairwise_affinities: need at least 3 points");
  if (!(perplexity < static_cast<double>(n))) throw Error("pairwise_affinities: perplexity must be below n");
  const Matrix d = kernels::pairwise_sq_distances(features, exec);
  Matrix cond(n, n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  // Rows are independent; a failing row rethrows after the loop.
  std::vector<std::string> failures(n);
  auto body = [&](std::ptrdiff_t i) {
    const auto r = static_cast<std::size_t>(i);
    try {
      fit_row(d.row(r), r, perplexity, tol, cond.row(r));
    } catch (const Error& e) {
      failures[r] = e.what();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw Error(f);
  }
  return cond;
}

Matrix pairwise_affinities(const Matrix& features, double perplexity, double tol, Exec exec) {
  const Matrix cond = conditional_affinities(features, perplexity, tol, exec);
  const std::size_t n = cond.rows();
  Matrix p(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p(i, j) = (cond(i, j) + cond(j, i)) * scale;
  }
  return p;
}

double kl_divergence(const Matrix& p, const Matrix& coords, Exec exec) {
  if (p.rows() != p.cols() || p.rows() != coords.rows() || coords.cols() != 2) {
    throw Error("kl_divergence: shape mismatch");
  }
  return kernels::tsne_kl(p, coords, exec);
}

Embedding2D tsne_project(const Matrix& features, const ProjectionConfig& cfg,
                         const TsneObserver& observer, Exec exec) {
  const std::size_t n = features.rows();
  cfg.validate(n);
  const Matrix p = pairwise_affinities(features, cfg.perplexity, cfg.entropy_tolerance, exec);

  Rng rng(cfg.seed);
  Embedding2D out;
  out.coords = Matrix(n, 2);
  for (auto& v : out.coords.values()) v = cfg.init_sigma * rng.normal();

  Matrix& y = out.coords;
  Matrix grad(n, 2);
  std::vector<double> update(2 * n, 0.0), gains(2 * n, 1.0);
  for (int it = 0; it < cfg.iterations; ++it) {
    const double exaggeration = it < cfg.exaggeration_iterations ? cfg.early_exaggeration : 1.0;
    const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
    kernels::tsne_gradient(p, y, exaggeration, grad, exec);
    auto& yv = y.values();
    const auto& gv = grad.values();
    for (std::size_t i = 0; i < yv.size(); ++i) {
      const bool flip = (gv[i] > 0.0) != (update[i] > 0.0);
      gains[i] = std::max(flip ? gains[i] + 0.2 : gains[i] * 0.8, cfg.min_gain);
      update[i] = momentum * update[i] - cfg.learning_rate * gains[i] * gv[i];
      yv[i] += update[i];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y(i, 0);
      my += y(i, 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mx;
      y(i, 1) -= my;
    }
    for (double v : yv) {
      if (!std::isfinite(v)) throw Error("t-SNE diverged at iteration " + std::to_string(it + 1));
    }
    if (static_cast<std::size_t>(cfg.iterations - it) <= kKlTail) {
      out.kl_tail.push_back(kernels::tsne_kl(p, y, exec));
    }
    if (observer) observer(it, y);
    out.iterations_run = it + 1;
  }
  out.final_kl = out.kl_tail.empty() ? kernels::tsne_kl(p, y, exec) : out.kl_tail.back();
  for (std::size_t i = 1; i < out.kl_tail.size(); ++i) {
    if (out.kl_tail[i] > out.kl_tail[i - 1] + 1e-3) out.kl_tail_non_increasing = false;
  }
  return out;
}

void write_embedding_csv(const std::filesystem::path& path, const Matrix& coords,
                         std::span<const std::size_t> node_ids, const LabelVector* labels) {
  if (node_ids.size() != coords.rows()) throw Error("write_embedding_csv: node id count mismatch");
  if (labels && labels->size() != coords.rows()) throw Error("write_embedding_csv: label count mismatch");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << (labels ? "node,x,y,label\n" : "node,x,y\n");
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    out << node_ids[i] << ',' << fmt(coords(i, 0)) << ',' << fmt(coords(i, 1));
    if (labels) out << ',' << labels->values[i];
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

EmbeddingFile read_embedding_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty embedding file");
  const bool with_labels = line.rfind("node,x,y,label", 0) == 0;
  if (!with_labels && line.rfind("node,x,y", 0) != 0) throw Error(path.string() + ": bad header");
  std::vector<double> xy;
  EmbeddingFile f;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != (with_labels ? 4u : 3u)) {
      throw Error(path.string() + " line " + std::to_string(line_no) + ": wrong column count");
    }
    f.node_ids.push_back(std::stoull(cells[0]));
    xy.push_back(std::stod(cells[1]));
    xy.push_back(std::stod(cells[2]));
    if (with_labels) {
      f.labels.values.push_back(std::stoi(cells[3]));
      f.labels.provenance.push_back(Provenance::True);
    }
  }
  f.coords = Matrix(f.node_ids.size(), 2);
  f.coords.values() = std::move(xy);
  return f;
}

}  // namespace epl
