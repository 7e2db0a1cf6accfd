#include "epl/probe.hpp"

#include <cmath>
#include <limits>

#include "epl/checkpoint.hpp"

namespace epl {
namespace {

void column_stats(const Matrix& x, std::span<const std::size_t> rows, std::vector<double>& mean,
                  std::vector<double>& scale) {
  const std::size_t d = x.cols();
  mean.assign(d, 0.0);
  scale.assign(d, 1.0);
  if (rows.empty()) return;
  const double m = static_cast<double>(rows.size());
  for (std::size_t c = 0; c < d; ++c) {
    double mu = 0.0;
    for (auto r : rows) mu += x(r, c);
    mu /= m;
    double var = 0.0;
    for (auto r : rows) var += (x(r, c) - mu) * (x(r, c) - mu);
    const double sd = std::sqrt(var / m);
    mean[c] = mu;
    scale[c] = sd > 0.0 ? sd : 1.0;
  }
}

void standardize_into(std::span<const double> x, const std::vector<double>& mean,
                      const std::vector<double>& scale, std::vector<double>& out) {
  out.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = (x[c] - mean[c]) / scale[c];
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

template <class Body>
void for_each_row(std::size_t n, Exec exec, Body&& body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

struct SoftmaxPass {
  std::vector<double> xs, a, h, p;
};

void softmax_forward(const SoftmaxModel& m, std::span<const double> x, SoftmaxPass& s) {
  standardize_into(x, m.mean, m.scale, s.xs);
  const double* w1 = m.values.data();
  const double* b1 = w1 + m.hidden * m.inputs;
  const double* w2 = b1 + m.hidden;
  const double* b2 = w2 + m.classes * m.hidden;
  s.a.resize(m.hidden);
  s.h.resize(m.hidden);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    double v = b1[j];
    for (std::size_t i = 0; i < m.inputs; ++i) v += w1[j * m.inputs + i] * s.xs[i];
    s.a[j] = v;
    s.h[j] = v > 0.0 ? v : 0.0;
  }
  s.p.resize(m.classes);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < m.classes; ++c) {
    double v = b2[c];
    for (std::size_t j = 0; j < m.hidden; ++j) v += w2[c * m.hidden + j] * s.h[j];
    s.p[c] = v;
    mx = std::max(mx, v);
  }
  double sum = 0.0;
  for (auto& v : s.p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : s.p) v /= sum;
}

void check_labeled(std::span<const Label> labels, std::span<const std::size_t> indices, std::size_t classes,
                   const char* who) {
  for (auto i : indices) {
    if (i >= labels.size() || labels[i] == kUnlabeled) {
      throw Error(std::string(who) + ": training index " + std::to_string(i) + " is unlabeled");
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw Error(std::string(who) + ": label " + std::to_string(labels[i]) + " at index " +
                  std::to_string(i) + " is out of range");
    }
  }
}

}  // namespace

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

std::vector<double> LinearModel::scores(std::span<const double> x) const {
  if (x.size() != dims()) throw Error("linear model: expected " + std::to_string(dims()) + " features");
  std::vector<double> xs;
  standardize_into(x, mean, scale, xs);
  std::vector<double> s(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double v = bias[c];
    for (std::size_t j = 0; j < xs.size(); ++j) v += weights(c, j) * xs[j];
    s[c] = v;
  }
  return s;
}

double linear_objective(const LinearModel& model, const Matrix& features, std::span<const Label> labels,
                        double lambda) {
  const std::size_t n = features.rows();
  double obj = 0.0;
  for (std::size_t c = 0; c < model.classes; ++c) {
    double reg = 0.0;
    for (std::size_t j = 0; j < model.dims(); ++j) reg += model.weights(c, j) * model.weights(c, j);
    obj += 0.5 * lambda * reg;
  }
  double hinge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = model.scores(features.row(i));
    for (std::size_t c = 0; c < model.classes; ++c) {
      const double y = labels[i] == static_cast<Label>(c) ? 1.0 : -1.0;
      hinge += std::max(0.0, 1.0 - y * s[c]);
    }
  }
  return obj + hinge / static_cast<double>(n);
}

LinearModel train_linear(const Matrix& features, std::span<const Label> labels, const LinearConfig& config) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (labels.size() != n) throw Error("train_linear: label count mismatch");
  if (n == 0) throw Error("train_linear: empty training set");
  if (!(config.lambda >= 0.0) || !(config.step > 0.0) || config.epochs < 0) {
    throw Error("train_linear: invalid configuration");
  }
  Label max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) throw Error("train_linear: sample " + std::to_string(i) + " is unlabeled");
    max_label = std::max(max_label, labels[i]);
  }
  bool two = false;
  for (std::size_t i = 1; i < n && !two; ++i) two = labels[i] != labels[0];
  if (!two) throw Error("train_linear: need at least 2 classes");
  for (double v : features.values()) {
    if (!std::isfinite(v)) throw Error("train_linear: non-finite feature");
  }

  LinearModel m;
  m.classes = static_cast<std::size_t>(max_label) + 1;
  m.weights = Matrix(m.classes, d);
  m.bias.assign(m.classes, 0.0);
  const auto rows = all_rows(n);
  column_stats(features, rows, m.mean, m.scale);
  Matrix xs(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) xs(i, j) = (features(i, j) - m.mean[j]) / m.scale[j];
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> gw(d);
  for (int e = 1; e <= config.epochs; ++e) {
    const double eta = config.step / std::sqrt(static_cast<double>(e));
    for (std::size_t c = 0; c < m.classes; ++c) {
      for (std::size_t j = 0; j < d; ++j) gw[j] = config.lambda * m.weights(c, j);
      double gb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double y = labels[i] == static_cast<Label>(c) ? 1.0 : -1.0;
        double s = m.bias[c];
        for (std::size_t j = 0; j < d; ++j) s += m.weights(c, j) * xs(i, j);
        if (y * s < 1.0) {
          for (std::size_t j = 0; j < d; ++j) gw[j] -= y * xs(i, j) * inv_n;
          gb -= y * inv_n;
        }
      }
      for (std::size_t j = 0; j < d; ++j) m.weights(c, j) -= eta * gw[j];
      m.bias[c] -= eta * gb;
    }
    m.objective.push_back(linear_objective(m, features, labels, config.lambda));
  }
  return m;
}

SoftmaxModel init_softmax(std::size_t inputs, std::size_t classes, const SoftmaxConfig& config) {
  if (inputs == 0 || classes < 2 || config.hidden == 0) throw Error("softmax: invalid shape");
  SoftmaxModel m;
  m.inputs = inputs;
  m.hidden = config.hidden;
  m.classes = classes;
  m.values.assign(m.parameter_count(), 0.0);
  m.mean.assign(inputs, 0.0);
  m.scale.assign(inputs, 1.0);
  Rng rng(derive_seed(config.seed, 1));
  const double l1 = std::sqrt(6.0 / static_cast<double>(inputs));
  for (std::size_t k = 0; k < m.hidden * inputs; ++k) m.values[k] = rng.uniform(-l1, l1);
  const std::size_t w2 = m.hidden * inputs + m.hidden;
  const double l2 = std::sqrt(6.0 / static_cast<double>(m.hidden));
  for (std::size_t k = 0; k < classes * m.hidden; ++k) m.values[w2 + k] = rng.uniform(-l2, l2);
  return m;
}

std::vector<double> SoftmaxModel::probabilities(std::span<const double> x) const {
  if (x.size() != inputs) throw Error("softmax model: expected " + std::to_string(inputs) + " features");
  SoftmaxPass s;
  softmax_forward(*this, x, s);
  return s.p;
}

double softmax_loss(const SoftmaxModel& m, const Matrix& features, std::span<const Label> labels,
                    std::span<const std::size_t> indices, std::vector<double>* grad) {
  if (indices.empty()) throw Error("softmax_loss: no samples");
  if (grad) grad->assign(m.parameter_count(), 0.0);
  const double inv = 1.0 / static_cast<double>(indices.size());
  const double* w2 = m.values.data() + m.hidden * m.inputs + m.hidden;
  SoftmaxPass s;
  std::vector<double> gh(m.hidden);
  double loss = 0.0;
  for (auto i : indices) {
    softmax_forward(m, features.row(i), s);
    const auto y = static_cast<std::size_t>(labels[i]);
    loss -= std::log(std::max(s.p[y], std::numeric_limits<double>::min()));
    if (!grad) continue;
    double* g_w1 = grad->data();
    double* g_b1 = g_w1 + m.hidden * m.inputs;
    double* g_w2 = g_b1 + m.hidden;
    double* g_b2 = g_w2 + m.classes * m.hidden;
    std::fill(gh.begin(), gh.end(), 0.0);
    for (std::size_t c = 0; c < m.classes; ++c) {
      const double go = (s.p[c] - (c == y ? 1.0 : 0.0)) * inv;
      g_b2[c] += go;
      for (std::size_t j = 0; j < m.hidden; ++j) {
        g_w2[c * m.hidden + j] += go * s.h[j];
        gh[j] += w2[c * m.hidden + j] * go;
      }
    }
    for (std::size_t j = 0; j < m.hidden; ++j) {
      if (s.a[j] <= 0.0) continue;
      g_b1[j] += gh[j];
      for (std::size_t k = 0; k < m.inputs; ++k) g_w1[j * m.inputs + k] += gh[j] * s.xs[k];
    }
  }
  return loss * inv;
}

SoftmaxModel train_softmax(const Matrix& features, const LabelVector& labels,
                           std::span<const std::size_t> indices, std::size_t classes,
                           const SoftmaxConfig& config) {
  if (labels.size() != features.rows()) throw Error("train_softmax: label count mismatch");
  if (indices.empty()) throw Error("train_softmax: empty training set");
  if (config.batch_size == 0 || config.epochs < 0 || !(config.learning_rate >= 0.0)) {
    throw Error("train_softmax: invalid configuration");
  }
  check_labeled(labels.values, indices, classes, "train_softmax");
  SoftmaxModel m = init_softmax(features.cols(), classes, config);
  column_stats(features, indices, m.mean, m.scale);
  if (config.epochs == 0) return m;

  std::vector<std::size_t> order(indices.begin(), indices.end());
  const std::size_t per_epoch = (order.size() + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(per_epoch) * config.epochs;
  std::vector<double> velocity(m.parameter_count(), 0.0), grad;
  Rng rng(derive_seed(config.seed, 2));
  std::size_t step = 0;
  for (int e = 0; e < config.epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      softmax_loss(m, features, labels.values, batch, &grad);
      const double lr = config.learning_rate * (1.0 - static_cast<double>(step) / total_steps);
      for (std::size_t k = 0; k < m.values.size(); ++k) {
        velocity[k] = config.momentum * velocity[k] + grad[k];
        m.values[k] -= lr * velocity[k];
      }
      ++step;
    }
  }
  for (double v : m.values) {
    if (!std::isfinite(v)) throw Error("train_softmax: training diverged");
  }
  return m;
}

LabelVector predict(const LinearModel& model, const Matrix& features, Exec exec) {
  if (features.cols() != model.dims()) throw Error("predict: feature dimension mismatch");
  std::vector<Label> out(features.rows());
  for_each_row(features.rows(), exec,
               [&](std::size_t i) { out[i] = static_cast<Label>(argmax(model.scores(features.row(i)))); });
  return LabelVector::from_labels(std::move(out));
}

LabelVector predict(const SoftmaxModel& model, const Matrix& features, Exec exec) {
  if (features.cols() != model.inputs) throw Error("predict: feature dimension mismatch");
  std::vector<Label> out(features.rows());
  for_each_row(features.rows(), exec, [&](std::size_t i) {
    out[i] = static_cast<Label>(argmax(model.probabilities(features.row(i))));
  });
  return LabelVector::from_labels(std::move(out));
}

void save_linear(const std::filesystem::path& path, const LinearModel& model) {
  Checkpoint c;
  c.kind = ModelKind::Linear;
  c.shape = {static_cast<std::uint32_t>(model.classes), static_cast<std::uint32_t>(model.dims())};
  c.values = model.weights.values();
  c.values.insert(c.values.end(), model.bias.begin(), model.bias.end());
  c.values.insert(c.values.end(), model.mean.begin(), model.mean.end());
  c.values.insert(c.values.end(), model.scale.begin(), model.scale.end());
  write_checkpoint(path, c);
}

LinearModel load_linear(const std::filesystem::path& path) {
  const auto c = read_checkpoint(path);
  if (c.kind != ModelKind::Linear || c.shape.size() != 2) throw Error(path.string() + ": not a linear model");
  const std::size_t k = c.shape[0], d = c.shape[1];
  if (c.values.size() != k * d + k + 2 * d) throw Error(path.string() + ": linear parameter count mismatch");
  LinearModel m;
  m.classes = k;
  m.weights = Matrix(k, d);
  auto it = c.values.begin();
  std::copy(it, it + static_cast<std::ptrdiff_t>(k * d), m.weights.values().begin());
  it += static_cast<std::ptrdiff_t>(k * d);
  m.bias.assign(it, it + static_cast<std::ptrdiff_t>(k));
  it += static_cast<std::ptrdiff_t>(k);
  m.mean.assign(it, it + static_cast<std::ptrdiff_t>(d));
  it += static_cast<std::ptrdiff_t>(d);
  m.scale.assign(it, c.values.end());
  return m;
}

void save_softmax(const std::filesystem::path& path, const SoftmaxModel& model) {
  Checkpoint c;
  c.kind = ModelKind::Softmax;
  c.shape = {static_cast<std::uint32_t>(model.inputs), static_cast<std::uint32_t>(model.hidden),
             static_cast<std::uint32_t>(model.classes)};
  c.values = model.values;
  c.values.insert(c.values.end(), model.mean.begin(), model.mean.end());
  c.values.insert(c.values.end(), model.scale.begin(), model.scale.end());
  write_checkpoint(path, c);
}

SoftmaxModel load_softmax(const std::filesystem::path& path) {
  const auto c = read_checkpoint(path);
  if (c.kind != ModelKind::Softmax || c.shape.size() != 3) throw Error(path.string() + ": not a softmax model");
  SoftmaxModel m;
  m.inputs = c.shape[0];
  m.hidden = c.shape[1];
  m.classes = c.shape[2];
  const std::size_t p = m.parameter_count();
  if (c.values.size() != p + 2 * m.inputs) throw Error(path.string() + ": softmax parameter count mismatch");
  auto it = c.values.begin() + static_cast<std::ptrdiff_t>(p);
  m.values.assign(c.values.begin(), it);
  m.mean.assign(it, it + static_cast<std::ptrdiff_t>(m.inputs));
  m.scale.assign(it + static_cast<std::ptrdiff_t>(m.inputs), c.values.end());
  return m;
}

}  // namespace epl
