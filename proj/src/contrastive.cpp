#include "epl/contrastive.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "epl/checkpoint.hpp"

namespace epl {
namespace {

constexpr double kNormEpsilon = 1e-12;

template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

struct Activations {
  std::vector<double> a1, h1, latent, a3, h3, u, z;
  double norm = 0.0;
};

void dense(const EncoderParams& p, const EncoderParams::Layer& l, std::span<const double> in,
           std::vector<double>& out) {
  out.resize(l.out);
  const double* w = p.values.data() + l.weights;
  const double* b = p.values.data() + l.bias;
  for (std::size_t o = 0; o < l.out; ++o) {
    double s = b[o];
    const double* row = w + o * l.in;
    for (std::size_t i = 0; i < l.in; ++i) s += row[i] * in[i];
    out[o] = s;
  }
}

void relu(const std::vector<double>& in, std::vector<double>& out) {
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void forward(const EncoderParams& p, std::span<const double> x, Activations& act) {
  if (x.size() != p.shape.input) throw Error("encoder: input dimension mismatch");
  dense(p, p.layer(0), x, act.a1);
  relu(act.a1, act.h1);
  dense(p, p.layer(1), act.h1, act.latent);
  dense(p, p.layer(2), act.latent, act.a3);
  relu(act.a3, act.h3);
  dense(p, p.layer(3), act.h3, act.u);
  double sq = 0.0;
  for (double v : act.u) sq += v * v;
  act.norm = std::sqrt(sq);
  act.z.assign(act.u.size(), 0.0);
  if (act.norm < kNormEpsilon) {
    act.z[0] = 1.0;
  } else {
    for (std::size_t i = 0; i < act.u.size(); ++i) act.z[i] = act.u[i] / act.norm;
  }
}

// Accumulates into grad: W += g_out * in^T, b += g_out; returns W^T g_out.
void dense_backward(const EncoderParams& p, const EncoderParams::Layer& l,
                    std::span<const double> in, std::span<const double> g_out,
                    std::span<double> grad, std::vector<double>* g_in) {
  const double* w = p.values.data() + l.weights;
  double* gw = grad.data() + l.weights;
  double* gb = grad.data() + l.bias;
  if (g_in) g_in->assign(l.in, 0.0);
  for (std::size_t o = 0; o < l.out; ++o) {
    const double go = g_out[o];
    gb[o] += go;
    if (go == 0.0) continue;
    double* gw_row = gw + o * l.in;
    const double* w_row = w + o * l.in;
    for (std::size_t i = 0; i < l.in; ++i) {
      gw_row[i] += go * in[i];
      if (g_in) (*g_in)[i] += w_row[i] * go;
    }
  }
}

void backward(const EncoderParams& p, std::span<const double> x, const Activations& act,
              std::span<const double> gz, std::span<double> grad) {
  const std::size_t m = act.z.size();
  std::vector<double> gu(m, 0.0);
  if (act.norm >= kNormEpsilon) {
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += act.z[i] * gz[i];
    for (std::size_t i = 0; i < m; ++i) gu[i] = (gz[i] - act.z[i] * dot) / act.norm;
  }
  std::vector<double> gh3, glat, gh1;
  dense_backward(p, p.layer(3), act.h3, gu, grad, &gh3);
  for (std::size_t i = 0; i < gh3.size(); ++i) gh3[i] = act.a3[i] > 0.0 ? gh3[i] : 0.0;
  dense_backward(p, p.layer(2), act.latent, gh3, grad, &glat);
  dense_backward(p, p.layer(1), act.h1, glat, grad, &gh1);
  for (std::size_t i = 0; i < gh1.size(); ++i) gh1[i] = act.a1[i] > 0.0 ? gh1[i] : 0.0;
  dense_backward(p, p.layer(0), x, gh1, grad, nullptr);
}

// Shared softmax-over-others loss; positives[i] lists the positive views of
// anchor i, each weighted 1/|positives[i]|.
LossResult contrastive_core(const Matrix& z, double tau,
                            const std::vector<std::vector<std::size_t>>& positives) {
  if (!(tau > 0.0)) throw Error("contrastive loss: temperature must be positive");
  const std::size_t n = z.rows();
  Matrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      double s = 0.0;
      for (std::size_t c = 0; c < z.cols(); ++c) s += z(i, c) * z(a, c);
      sim(i, a) = s / tau;
    }
  }
  Matrix g(n, n);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) mx = std::max(mx, sim(i, a));
    }
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) sum += std::exp(sim(i, a) - mx);
    }
    const double lse = mx + std::log(sum);
    const double w = 1.0 / static_cast<double>(positives[i].size());
    double pos = 0.0;
    for (auto p : positives[i]) pos += sim(i, p);
    total += lse - w * pos;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) g(i, a) = std::exp(sim(i, a) - lse) * inv_n;
    }
    for (auto p : positives[i]) g(i, p) -= w * inv_n;
  }
  LossResult r;
  r.loss = total * inv_n;
  r.grad = Matrix(n, z.cols());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      const double coef = (g(k, a) + g(a, k)) / tau;
      if (coef == 0.0) continue;
      for (std::size_t c = 0; c < z.cols(); ++c) r.grad(k, c) += coef * z(a, c);
    }
  }
  return r;
}

LossResult batch_loss(ContrastiveMode mode, const Matrix& z, std::span<const Label> labels, double tau) {
  return mode == ContrastiveMode::SimCLR ? ntxent_loss(z, tau) : supcon_loss(z, labels, tau);
}

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Splits `order` into consecutive chunks of `size`; a trailing chunk with a
// single sample joins the previous one.
std::vector<std::vector<std::size_t>> chunk(const std::vector<std::size_t>& order, std::size_t size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + size)));
  }
  if (out.size() > 1 && out.back().size() < 2) {
    auto tail = std::move(out.back());
    out.pop_back();
    out.back().insert(out.back().end(), tail.begin(), tail.end());
  }
  return out;
}

// SupCon batches interleave classes round-robin so each batch mixes them.
std::vector<std::vector<std::size_t>> make_batches(ContrastiveMode mode, std::vector<std::size_t> idx,
                                                   std::span<const Label> labels, std::size_t size,
                                                   Rng& rng) {
  if (mode == ContrastiveMode::SimCLR) {
    rng.shuffle(idx.begin(), idx.end());
    return chunk(idx, size);
  }
  std::map<Label, std::vector<std::size_t>> by_class;
  for (auto i : idx) by_class[labels[i]].push_back(i);
  for (auto& [c, members] : by_class) rng.shuffle(members.begin(), members.end());
  std::vector<std::size_t> order;
  for (std::size_t r = 0; order.size() < idx.size(); ++r) {
    for (auto& [c, members] : by_class) {
      if (r < members.size()) order.push_back(members[r]);
    }
  }
  return chunk(order, size);
}

ViewBatch make_views(const Matrix& features, std::span<const Label> labels,
                     const std::vector<std::size_t>& samples, const AugmentStrength& strength,
                     std::span<const double> scale, Rng& rng) {
  const std::size_t b = samples.size();
  ViewBatch vb;
  vb.views = Matrix(2 * b, features.cols());
  vb.source.resize(2 * b);
  if (!labels.empty()) vb.labels.resize(2 * b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto s = samples[i];
    for (std::size_t v = 0; v < 2; ++v) {
      const auto row = i + v * b;
      const auto view = augment(features.row(s), strength, scale, rng);
      std::copy(view.begin(), view.end(), vb.views.row(row).begin());
      vb.source[row] = s;
      if (!labels.empty()) vb.labels[row] = labels[s];
    }
  }
  return vb;
}

double view_batch_loss(ContrastiveMode mode, const EncoderParams& params, const ViewBatch& batch,
                       double tau, Exec exec) {
  const std::size_t v = batch.views.rows();
  Matrix z(v, params.shape.head_out);
  for_each_index(v, exec, [&](std::size_t i) {
    Activations act;
    forward(params, batch.views.row(i), act);
    std::copy(act.z.begin(), act.z.end(), z.row(i).begin());
  });
  return batch_loss(mode, z, batch.labels, tau).loss;
}

}  // namespace

std::size_t EncoderShape::parameter_count() const {
  return hidden * input + hidden + latent * hidden + latent + head_hidden * latent + head_hidden +
         head_out * head_hidden + head_out;
}

EncoderParams::Layer EncoderParams::layer(int index) const {
  const std::size_t dims[5] = {shape.input, shape.hidden, shape.latent, shape.head_hidden, shape.head_out};
  std::size_t offset = 0;
  for (int l = 0; l < 4; ++l) {
    Layer layer{offset, offset + dims[l + 1] * dims[l], dims[l], dims[l + 1]};
    if (l == index) return layer;
    offset = layer.bias + layer.out;
  }
  throw Error("encoder layer index out of range");
}

EncoderParams EncoderParams::scratch(EncoderShape shape, std::uint64_t seed) {
  if (shape.input == 0 || shape.hidden == 0 || shape.latent == 0 || shape.head_hidden == 0 ||
      shape.head_out == 0) {
    throw Error("encoder: every layer width must be positive");
  }
  EncoderParams p(shape);
  Rng rng(seed);
  for (int l = 0; l < 4; ++l) {
    const auto layer = p.layer(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in));
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) p.values[layer.weights + i] = rng.uniform(-limit, limit);
  }
  return p;
}

Encoded encode(const EncoderParams& params, std::span<const double> x) {
  Activations act;
  forward(params, x, act);
  return {act.latent, act.z};
}

Matrix extract_features(const EncoderParams& params, const Matrix& features,
                        std::span<const std::size_t> indices, Exec exec) {
  if (features.cols() != params.shape.input) throw Error("extract_features: dimension mismatch");
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(features.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    indices = all;
  }
  Matrix out(indices.size(), params.shape.latent);
  for_each_index(indices.size(), exec, [&](std::size_t r) {
    Activations act;
    forward(params, features.row(indices[r]), act);
    std::copy(act.latent.begin(), act.latent.end(), out.row(r).begin());
  });
  return out;
}

std::vector<double> augment(std::span<const double> x, const AugmentStrength& strength,
                            std::span<const double> feature_scale, Rng& rng) {
  std::vector<double> view(x.begin(), x.end());
  for (std::size_t j = 0; j < view.size(); ++j) {
    const double scale = feature_scale.empty() ? 1.0 : feature_scale[j];
    view[j] += strength.noise * scale * rng.normal();
    if (rng.uniform() < strength.dropout) view[j] = 0.0;
  }
  return view;
}

LossResult ntxent_loss(const Matrix& z, double temperature) {
  const std::size_t n = z.rows();
  if (n < 4 || n % 2 != 0) throw Error("ntxent_loss: need an even number of at least 4 views");
  std::vector<std::vector<std::size_t>> positives(n);
  for (std::size_t i = 0; i < n; ++i) positives[i] = {(i + n / 2) % n};
  return contrastive_core(z, temperature, positives);
}

LossResult supcon_loss(const Matrix& z, std::span<const Label> labels, double temperature) {
  const std::size_t n = z.rows();
  if (labels.size() != n) throw Error("supcon_loss: every view needs a label");
  if (n < 2) throw Error("supcon_loss: need at least 2 views");
  std::vector<std::vector<std::size_t>> positives(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kUnlabeled) throw Error("supcon_loss: view " + std::to_string(i) + " is unlabeled");
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i && labels[a] == labels[i]) positives[i].push_back(a);
    }
    if (positives[i].empty()) {
      throw Error("supcon_loss: view " + std::to_string(i) + " (label " + std::to_string(labels[i]) +
                  ") has no positive in the batch");
    }
  }
  return contrastive_core(z, temperature, positives);
}

std::string to_string(ContrastiveMode m) { return m == ContrastiveMode::SimCLR ? "simclr" : "supcon"; }

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("train: epochs must be non-negative");
  if (batch_size < 2) throw Error("train: batch_size must be at least 2");
  if (!(temperature > 0.0)) throw Error("train: temperature must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 0.5)) {
    throw Error("train: validation_fraction must lie in (0, 0.5)");
  }
  if (!(learning_rate > 0.0) || min_learning_rate < 0.0 || weight_decay < 0.0) {
    throw Error("train: optimizer rates must be positive");
  }
  if (init == InitMode::WarmStart && warm_start_checkpoint.empty()) {
    throw Error("train: warm start needs a checkpoint path");
  }
}

std::string TrainConfig::describe() const {
  std::ostringstream s;
  s << "epochs=" << epochs << "\nbatch_size=" << batch_size << "\ntemperature=" << fmt(temperature)
    << "\noptimizer=adamw lr=" << fmt(learning_rate) << " weight_decay=" << fmt(weight_decay)
    << " beta1=" << fmt(beta1) << " beta2=" << fmt(beta2) << " eps=" << fmt(epsilon)
    << "\nschedule=cosine t_max=" << epochs << " min_lr=" << fmt(min_learning_rate)
    << "\ninit=" << (init == InitMode::Scratch ? "scratch" : "warm_start:" + warm_start_checkpoint.string())
    << "\nvalidation_fraction=" << fmt(validation_fraction)
    << "\naugment noise=" << fmt(augmentation.noise) << " dropout=" << fmt(augmentation.dropout)
    << "\nencoder hidden=" << shape.hidden << " latent=" << shape.latent
    << " head_hidden=" << shape.head_hidden << " head_out=" << shape.head_out
    << "\nbatching=simclr:shuffled supcon:class-round-robin (two views per sample)"
    << "\nseed=" << seed << '\n';
  return s.str();
}

ParamGradient batch_gradient(ContrastiveMode mode, const EncoderParams& params,
                             const ViewBatch& batch, double temperature, Exec exec) {
  const std::size_t v = batch.views.rows();
  const std::size_t np = params.values.size();
  std::vector<Activations> acts(v);
  Matrix z(v, params.shape.head_out);
  for_each_index(v, exec, [&](std::size_t i) {
    forward(params, batch.views.row(i), acts[i]);
    std::copy(acts[i].z.begin(), acts[i].z.end(), z.row(i).begin());
  });
  const auto loss = batch_loss(mode, z, batch.labels, temperature);

  std::vector<double> per_view(v * np, 0.0);
  for_each_index(v, exec, [&](std::size_t i) {
    backward(params, batch.views.row(i), acts[i], loss.grad.row(i),
             std::span<double>(per_view.data() + i * np, np));
  });
  ParamGradient out;
  out.loss = loss.loss;
  out.grad.assign(np, 0.0);
  for (std::size_t i = 0; i < v; ++i) {
    const double* g = per_view.data() + i * np;
    for (std::size_t k = 0; k < np; ++k) out.grad[k] += g[k];
  }
  return out;
}

std::vector<double> feature_scale(const Matrix& features, std::span<const std::size_t> indices) {
  std::vector<double> scale(features.cols(), 1.0);
  if (indices.empty()) return scale;
  const double m = static_cast<double>(indices.size());
  for (std::size_t c = 0; c < features.cols(); ++c) {
    double mean = 0.0;
    for (auto i : indices) mean += features(i, c);
    mean /= m;
    double var = 0.0;
    for (auto i : indices) var += (features(i, c) - mean) * (features(i, c) - mean);
    const double sd = std::sqrt(var / m);
    scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return scale;
}

double evaluate_loss(ContrastiveMode mode, const EncoderParams& params, const Matrix& features,
                     std::span<const Label> labels, std::span<const std::size_t> indices,
                     const TrainConfig& config, std::uint64_t view_seed, Exec exec) {
  if (indices.size() < 2) throw Error("evaluate_loss: need at least 2 samples");
  const auto scale = feature_scale(features, indices);
  Rng rng(view_seed);
  const std::vector<std::size_t> order(indices.begin(), indices.end());
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& samples : chunk(order, config.batch_size)) {
    const auto vb = make_views(features, mode == ContrastiveMode::SupCon ? labels : std::span<const Label>{},
                               samples, config.augmentation, scale, rng);
    total += view_batch_loss(mode, params, vb, config.temperature, exec) * static_cast<double>(samples.size());
    count += samples.size();
  }
  return total / static_cast<double>(count);
}

TrainResult train_contrastive(ContrastiveMode mode, const Matrix& features,
                              std::span<const Label> labels, std::span<const std::size_t> indices,
                              const TrainConfig& cfg, const std::optional<EncoderParams>& init,
                              Exec exec) {
  cfg.validate();
  if (indices.empty()) throw Error("train: empty training role set");
  const bool supervised = mode == ContrastiveMode::SupCon;
  std::map<Label, std::size_t> class_count;
  if (supervised) {
    if (labels.size() != features.rows()) throw Error("train: SupCon needs labels");
    for (auto i : indices) {
      if (labels[i] == kUnlabeled) throw Error("train: SupCon sample " + std::to_string(i) + " is unlabeled");
      ++class_count[labels[i]];
    }
    for (auto i : indices) {
      if (class_count[labels[i]] == 1) {
        throw Error("train: SupCon class " + std::to_string(labels[i]) + " has a single sample (index " +
                    std::to_string(i) + ")");
      }
    }
  }
  if (indices.size() < 2) throw Error("train: need at least 2 training samples");

  EncoderShape shape = cfg.shape;
  shape.input = features.cols();
  EncoderParams params;
  if (init) {
    params = *init;
  } else if (cfg.init == InitMode::WarmStart) {
    params = load_encoder(cfg.warm_start_checkpoint);
  } else {
    params = EncoderParams::scratch(shape, derive_seed(cfg.seed, 1));
  }
  if (params.shape.input != features.cols()) throw Error("train: initial encoder expects a different input width");

  TrainResult result;
  result.params = params;
  if (cfg.epochs == 0) return result;

  // Hold out a validation subset; SupCon never drops a class below 2 samples.
  std::vector<std::size_t> order(indices.begin(), indices.end());
  Rng split_rng(derive_seed(cfg.seed, 2));
  split_rng.shuffle(order.begin(), order.end());
  const auto target = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(order.size()) + 0.5));
  std::vector<char> held(features.rows(), 0);
  std::size_t held_count = 0;
  auto remaining = class_count;
  for (auto i : order) {
    if (held_count >= target) break;
    if (supervised) {
      if (remaining[labels[i]] <= 2) continue;
      --remaining[labels[i]];
    } else if (order.size() - held_count <= 2) {
      break;
    }
    held[i] = 1;
    ++held_count;
  }
  std::vector<std::size_t> train_idx, val_idx;
  for (auto i : indices) (held[i] ? val_idx : train_idx).push_back(i);
  if (val_idx.empty()) {
    val_idx = train_idx;
    result.validation_on_training_set = true;
  }

  const auto scale = feature_scale(features, train_idx);
  const std::span<const Label> view_labels = supervised ? labels : std::span<const Label>{};
  std::vector<ViewBatch> val_batches;
  {
    Rng val_rng(derive_seed(cfg.seed, 3));
    for (const auto& samples : chunk(val_idx, cfg.batch_size)) {
      if (samples.size() < 2) continue;
      val_batches.push_back(make_views(features, view_labels, samples, cfg.augmentation, scale, val_rng));
    }
  }

  const std::size_t np = params.values.size();
  std::vector<double> m1(np, 0.0), m2(np, 0.0);
  std::size_t step = 0;
  Rng batch_rng(derive_seed(cfg.seed, 4));
  Rng aug_rng(derive_seed(cfg.seed, 5));
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.min_learning_rate + (cfg.learning_rate - cfg.min_learning_rate) *
                                                  (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs)) / 2.0;
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (const auto& samples : make_batches(mode, train_idx, labels, cfg.batch_size, batch_rng)) {
      if (samples.size() < 2) continue;
      const auto vb = make_views(features, view_labels, samples, cfg.augmentation, scale, aug_rng);
      const auto pg = batch_gradient(mode, params, vb, cfg.temperature, exec);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < np; ++k) {
        double& w = params.values[k];
        w -= lr * cfg.weight_decay * w;
        m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * pg.grad[k];
        m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * pg.grad[k] * pg.grad[k];
        w -= lr * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + cfg.epsilon);
      }
      epoch_loss += pg.loss;
      ++batches;
    }
    result.train_loss.push_back(batches ? epoch_loss / static_cast<double>(batches) : 0.0);

    double val = 0.0;
    std::size_t val_count = 0;
    for (const auto& vb : val_batches) {
      val += view_batch_loss(mode, params, vb, cfg.temperature, exec) * static_cast<double>(vb.pairs());
      val_count += vb.pairs();
    }
    val = val_count ? val / static_cast<double>(val_count) : result.train_loss.back();
    result.val_loss.push_back(val);
    if (val < best) {
      best = val;
      result.params = params;
      result.best_epoch = epoch + 1;
    }
  }
  return result;
}

TrainResult train(ContrastiveMode mode, const Dataset& data, const SplitAssignment& split,
                  const TrainConfig& config, Exec exec) {
  if (split.roles.size() != data.size()) throw Error("train: split does not match dataset");
  const auto idx = mode == ContrastiveMode::SimCLR
                       ? split.indices({Role::Supervised, Role::Unsupervised})
                       : split.indices(Role::Supervised);
  return train_contrastive(mode, data.features, data.labels, idx, config, std::nullopt, exec);
}

TrainResult finetune_supcon(const EncoderParams& params, const Dataset& data,
                            const SplitAssignment& split, const TrainConfig& config, Exec exec) {
  if (split.roles.size() != data.size()) throw Error("finetune_supcon: split does not match dataset");
  const auto idx = split.indices(Role::Supervised);
  return train_contrastive(ContrastiveMode::SupCon, data.features, data.labels, idx, config, params, exec);
}

}  // namespace epl
