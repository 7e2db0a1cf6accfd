#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "epl/checkpoint.hpp"
#include "epl/contrastive.hpp"
#include "epl/metrics.hpp"
#include "support.hpp"

using namespace epl;

namespace {

Matrix unit_rows(std::size_t n, std::size_t p, Rng& rng) {
  auto z = test::random_matrix(n, p, rng);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : z.row(i)) s += v * v;
    for (double& v : z.row(i)) v /= std::sqrt(s);
  }
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Supervised contrastive loss straight from its definition; with positives
// restricted to the partner view it is NT-Xent. Extended precision keeps the
// finite-difference noise well below the tolerance.
long double loss_oracle_ext(const Matrix& z, const std::vector<std::vector<std::size_t>>& positives, double tau) {
  const std::size_t n = z.rows();
  auto sim = [&](std::size_t i, std::size_t j) {
    long double s = 0.0L;
    for (std::size_t c = 0; c < z.cols(); ++c) s += static_cast<long double>(z(i, c)) * z(j, c);
    return s / tau;
  };
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double denom = 0.0L;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) denom += std::exp(sim(i, a));
    }
    long double anchor = 0.0L;
    for (std::size_t p : positives[i]) anchor -= std::log(std::exp(sim(i, p)) / denom);
    total += anchor / static_cast<long double>(positives[i].size());
  }
  return total / static_cast<long double>(n);
}

double loss_oracle(const Matrix& z, const std::vector<std::vector<std::size_t>>& positives, double tau) {
  return static_cast<double>(loss_oracle_ext(z, positives, tau));
}

std::vector<std::vector<std::size_t>> partner_positives(std::size_t n) {
  std::vector<std::vector<std::size_t>> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = {(i + n / 2) % n};
  return pos;
}

std::vector<std::vector<std::size_t>> label_positives(const std::vector<Label>& labels) {
  std::vector<std::vector<std::size_t>> pos(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (j != i && labels[j] == labels[i]) pos[i].push_back(j);
    }
  }
  return pos;
}

// Worst relative error of an analytic head gradient against central
// differences of the oracle.
double head_gradient_error(const Matrix& z0, const Matrix& grad,
                           const std::vector<std::vector<std::size_t>>& pos, double tau, double h) {
  Matrix z = z0;
  double worst = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
      const double keep = z(i, c);
      z(i, c) = keep + h;
      const long double up = loss_oracle_ext(z, pos, tau);
      z(i, c) = keep - h;
      const long double down = loss_oracle_ext(z, pos, tau);
      z(i, c) = keep;
      // Divide by the perturbation actually applied, which rounding makes inexact.
      const long double step = static_cast<long double>(keep + h) - static_cast<long double>(keep - h);
      worst = std::max(worst, test::rel_error(grad(i, c), static_cast<double>((up - down) / step), 1e-6));
    }
  }
  return worst;
}

Dataset two_blobs(int per_class, double spread, std::uint64_t seed) {
  return generate_blobs({.classes = 2, .per_class = per_class, .dims = 4, .spread = spread, .center_dist = 6, .seed = seed});
}

TrainConfig small_config(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.temperature = 0.5;
  cfg.learning_rate = 5e-3;
  cfg.min_learning_rate = 5e-4;
  cfg.shape.hidden = 16;
  cfg.shape.latent = 8;
  cfg.shape.head_hidden = 8;
  cfg.shape.head_out = 4;
  cfg.seed = 3;
  return cfg;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

TEST_SUITE("contrastive") {

TEST_CASE("augment: identity, full dropout, and dropout rate") {
  Rng rng(1);
  const std::vector<double> x = {1.5, -2.0, 0.25};
  const std::vector<double> scale = {1.0, 2.0, 0.5};
  CHECK(augment(x, {0.0, 0.0}, scale, rng) == x);
  CHECK(augment(x, {0.3, 1.0}, scale, rng) == std::vector<double>(3, 0.0));
  const std::vector<double> ones(10, 1.0);
  std::size_t zeros = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    for (double v : augment(ones, {0.0, 0.3}, ones, rng)) zeros += v == 0.0;
  }
  CHECK(std::abs(static_cast<double>(zeros) / 1e4 - 0.3) <= 0.01);
  Rng a(9), b(9);
  CHECK(augment(x, {}, scale, a) == augment(x, {}, scale, b));
}

TEST_CASE("encode: zero parameters, unit head, scale invariance, dimension check") {
  EncoderShape shape;
  shape.input = 5;
  const EncoderParams zero(shape);
  const auto e = encode(zero, std::vector<double>(5, 1.0));
  CHECK(e.latent == std::vector<double>(shape.latent, 0.0));
  REQUIRE(e.head.size() == shape.head_out);
  CHECK(e.head[0] == 1.0);
  for (std::size_t i = 1; i < e.head.size(); ++i) CHECK(e.head[i] == 0.0);

  Rng rng(2);
  auto params = EncoderParams::scratch(shape, 7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(5);
    for (auto& v : x) v = rng.normal() * 3.0;
    const auto h = encode(params, x).head;
    CHECK(std::abs(std::sqrt(dot(h, h)) - 1.0) <= 1e-9);
  }
  // Scaling the last head layer by a positive factor scales the raw output
  // uniformly, so the normalized head is unchanged.
  const std::vector<double> x = {0.3, -1.0, 2.0, 0.5, 0.0};
  const auto before = encode(params, x).head;
  const auto last = params.layer(3);
  for (std::size_t i = 0; i < last.in * last.out; ++i) params.values[last.weights + i] *= 2.0;
  for (std::size_t i = 0; i < last.out; ++i) params.values[last.bias + i] *= 2.0;
  const auto after = encode(params, x).head;
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(std::abs(before[i] - after[i]) <= 1e-12);
  CHECK_THROWS_AS(encode(params, std::vector<double>(4, 0.0)), Error);
}

TEST_CASE("identical embeddings give ln(2B - 1)") {
  for (std::size_t b : {2u, 3u, 8u}) {
    Matrix z(2 * b, 4);
    for (std::size_t i = 0; i < 2 * b; ++i) z(i, 1) = 1.0;
    const double want = std::log(2.0 * static_cast<double>(b) - 1.0);
    CHECK(std::abs(ntxent_loss(z, 0.07).loss - want) <= 1e-9);
    CHECK(std::abs(supcon_loss(z, std::vector<Label>(2 * b, 0), 0.07).loss - want) <= 1e-9);
  }
  Matrix z(4, 2);
  for (std::size_t i = 0; i < 4; ++i) z(i, 0) = 1.0;
  CHECK(std::abs(ntxent_loss(z, 0.5).loss - 1.098612) <= 1e-6);
}

TEST_CASE("B = 2 micro-batch matches a straight-line evaluation") {
  const double s = std::sqrt(0.5);
  Matrix z(4, 2);
  z(0, 0) = 1;
  z(1, 1) = 1;
  z(2, 0) = s;
  z(2, 1) = s;
  z(3, 0) = -s;
  z(3, 1) = s;
  const double tau = 0.5;
  // Anchor i: -log(e^{s_ip/t} / sum_{a != i} e^{s_ia/t}), partners (0,2) and (1,3).
  const double r = std::exp(s / tau), m = std::exp(-s / tau), one = std::exp(0.0);
  const double l0 = -std::log(r / (one + r + m));       // 0: with 1 -> 0, 2 -> s, 3 -> -s
  const double l1 = -std::log(r / (one + r + r));       // 1: with 0 -> 0, 2 -> s, 3 -> s
  const double l2 = -std::log(r / (r + r + one));       // 2: with 0 -> s, 1 -> s, 3 -> 0
  const double l3 = -std::log(r / (m + r + one));       // 3: with 0 -> -s, 1 -> s, 2 -> 0
  CHECK(std::abs(ntxent_loss(z, tau).loss - (l0 + l1 + l2 + l3) / 4.0) <= 1e-10);
}

TEST_CASE("loss values and gradients match the oracle on 20 random batches") {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t b = 4 + rng.index(5);
    const auto z = unit_rows(2 * b, 6, rng);
    const double tau = 0.07 + rng.uniform() * 0.5;
    CAPTURE(trial);

    const auto nt = ntxent_loss(z, tau);
    const auto npos = partner_positives(2 * b);
    CHECK(nt.loss >= 0.0);
    CHECK(std::abs(nt.loss - loss_oracle(z, npos, tau)) <= 1e-10 * std::max(1.0, nt.loss));
    CHECK(head_gradient_error(z, nt.grad, npos, tau, 1e-6) <= 1e-5);

    std::vector<Label> labels(2 * b);
    for (std::size_t i = 0; i < b; ++i) labels[i] = labels[i + b] = static_cast<Label>(rng.index(3));
    const auto sc = supcon_loss(z, labels, tau);
    const auto spos = label_positives(labels);
    CHECK(sc.loss >= 0.0);
    CHECK(std::abs(sc.loss - loss_oracle(z, spos, tau)) <= 1e-10 * std::max(1.0, sc.loss));
    CHECK(head_gradient_error(z, sc.grad, spos, tau, 1e-6) <= 1e-5);
  }
}

TEST_CASE("SupCon equals NT-Xent when every anchor has one positive") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = 2 + rng.index(10);
    const auto z = unit_rows(2 * b, 5, rng);
    std::vector<Label> labels(2 * b);
    for (std::size_t i = 0; i < b; ++i) labels[i] = labels[i + b] = static_cast<Label>(i);
    CHECK(std::abs(supcon_loss(z, labels, 0.1).loss - ntxent_loss(z, 0.1).loss) <= 1e-10);
  }
}

TEST_CASE("loss errors") {
  Rng rng(5);
  const auto z = unit_rows(4, 3, rng);
  CHECK_THROWS_AS(ntxent_loss(z, 0.0), Error);
  CHECK_THROWS_AS(ntxent_loss(unit_rows(2, 3, rng), 0.1), Error);
  try {
    supcon_loss(z, std::vector<Label>{0, 1, 0, 2}, 0.1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("view 1") != std::string::npos);
  }
}

TEST_CASE("end-to-end parameter gradient matches finite differences on 50 weights") {
  Rng rng(60);
  EncoderShape shape;
  shape.input = 5;
  shape.hidden = 12;
  shape.latent = 6;
  shape.head_hidden = 6;
  shape.head_out = 4;
  const auto params = EncoderParams::scratch(shape, 8);
  ViewBatch batch;
  batch.views = test::random_matrix(12, 5, rng);
  batch.labels = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  for (auto mode : {ContrastiveMode::SimCLR, ContrastiveMode::SupCon}) {
    const auto g = batch_gradient(mode, params, batch, 0.3, Exec::Serial);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const std::size_t w = rng.index(params.values.size());
      auto p = params;
      const double h = 1e-6;
      p.values[w] += h;
      const double up = batch_gradient(mode, p, batch, 0.3, Exec::Serial).loss;
      p.values[w] -= 2 * h;
      const double down = batch_gradient(mode, p, batch, 0.3, Exec::Serial).loss;
      worst = std::max(worst, test::rel_error(g.grad[w], (up - down) / (2 * h), 1e-7));
    }
    CAPTURE(to_string(mode));
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("SupCon training on separable blobs lowers the loss and is deterministic") {
  const auto d = two_blobs(60, 1.0, 4);
  const auto idx = all_rows(d.size());
  const auto cfg = small_config(50);
  const auto a = train_contrastive(ContrastiveMode::SupCon, d.features, d.labels, idx, cfg);
  REQUIRE(a.train_loss.size() == 50);
  CHECK(a.train_loss.back() < a.train_loss.front());
  CHECK(a.best_epoch >= 1);
  const auto b = train_contrastive(ContrastiveMode::SupCon, d.features, d.labels, idx, cfg);
  CHECK(test::bitwise_equal(a.params.values, b.params.values));
  CHECK(test::bitwise_equal(a.train_loss, b.train_loss));
}

TEST_CASE("zero epochs returns the initial parameters") {
  const auto d = two_blobs(20, 1.0, 5);
  const auto split = stratified_split(d, {0.2, 0.5, 0.3}, 1);
  auto cfg = small_config(0);
  const auto r = train(ContrastiveMode::SimCLR, d, split, cfg);
  auto shape = cfg.shape;
  shape.input = d.dims();
  CHECK(r.params == EncoderParams::scratch(shape, derive_seed(cfg.seed, 1)));
  CHECK(r.best_epoch == 0);
  const auto tuned = finetune_supcon(r.params, d, split, cfg);
  CHECK(tuned.params == r.params);
}

TEST_CASE("training errors name the problem") {
  auto d = two_blobs(10, 1.0, 6);
  const auto cfg = small_config(2);
  CHECK_THROWS_AS(train_contrastive(ContrastiveMode::SimCLR, d.features, {}, {}, cfg), Error);
  d.labels[3] = 7;
  d.class_count = 8;
  try {
    train_contrastive(ContrastiveMode::SupCon, d.features, d.labels, all_rows(d.size()), cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("class 7") != std::string::npos);
    CHECK(msg.find("index 3") != std::string::npos);
  }
  auto bad = cfg;
  bad.batch_size = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.validation_fraction = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("fine-tuning is deterministic") {
  const auto d = two_blobs(40, 2.0, 7);
  const auto split = stratified_split(d, {0.3, 0.4, 0.3}, 2);
  const auto cfg = small_config(3);
  const auto base = train(ContrastiveMode::SimCLR, d, split, cfg);
  const auto a = finetune_supcon(base.params, d, split, cfg);
  const auto b = finetune_supcon(base.params, d, split, cfg);
  CHECK(a.params == b.params);
  CHECK_FALSE(a.params == base.params);
}

TEST_CASE("extract_features: identity construction, order and determinism") {
  EncoderShape shape{.input = 3, .hidden = 3, .latent = 3, .head_hidden = 2, .head_out = 2};
  EncoderParams p(shape);
  for (int layer : {0, 1}) {
    const auto l = p.layer(layer);
    for (std::size_t i = 0; i < 3; ++i) p.values[l.weights + i * 3 + i] = 1.0;
  }
  Rng rng(3);
  Matrix x(10, 3);
  for (auto& v : x.values()) v = rng.uniform(0.0, 5.0);
  CHECK(extract_features(p, x) == x);
  const std::vector<std::size_t> pick = {7, 2, 5};
  const auto f = extract_features(p, x, pick);
  REQUIRE(f.rows() == 3);
  CHECK(f == x.select_rows(pick));
  const auto rnd = EncoderParams::scratch(shape, 1);
  CHECK(extract_features(rnd, x) == extract_features(rnd, x));
  CHECK_THROWS_AS(extract_features(rnd, Matrix(2, 4)), Error);
}

TEST_CASE("encoder checkpoint round trip and corrupt input") {
  const auto dir = test::scratch_dir("ckpt");
  EncoderShape shape;
  shape.input = 6;
  const auto p = EncoderParams::scratch(shape, 11);
  save_encoder(dir / "e.ckpt", p, "note=1\n");
  CHECK(load_encoder(dir / "e.ckpt") == p);
  CHECK(std::filesystem::exists(sidecar_path(dir / "e.ckpt")));
  std::ofstream(dir / "bad.ckpt") << "NOTACKPT";
  CHECK_THROWS_AS(load_encoder(dir / "bad.ckpt"), Error);
}

TEST_CASE("fine-tuning keeps latent class structure at least as clean as SimCLR alone") {
  // Smaller-scale twin of the acceptance check, on one replica.
  const auto d = generate_blobs({.classes = 3, .per_class = 80, .dims = 8, .spread = 2.0, .center_dist = 1, .seed = 12});
  const auto split = stratified_split(d, {0.1, 0.6, 0.3}, 3);
  auto cfg = small_config(20);
  const auto simclr = train(ContrastiveMode::SimCLR, d, split, cfg);
  const auto tuned = finetune_supcon(simclr.params, d, split, cfg);
  const auto su = split.indices({Role::Supervised, Role::Unsupervised});
  std::vector<Label> truth;
  for (auto i : su) truth.push_back(d.labels[i]);
  const auto tl = LabelVector::from_labels(truth);
  const double base = knn_consistency(extract_features(simclr.params, d.features, su), tl);
  const double fine = knn_consistency(extract_features(tuned.params, d.features, su), tl);
  CHECK(fine >= base);
}

}  // TEST_SUITE
