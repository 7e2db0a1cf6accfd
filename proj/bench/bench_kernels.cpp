// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// core count; the Serial/Parallel pairs share inputs.

#include <benchmark/benchmark.h>

#include "epl/contrastive.hpp"
#include "epl/dataset.hpp"
#include "epl/kernels.hpp"
#include "epl/opf.hpp"

namespace {

using epl::Exec;

epl::Matrix points(std::size_t n, std::size_t d, std::uint64_t seed = 7) {
  epl::Rng rng(seed);
  epl::Matrix m(n, d);
  for (auto& v : m.values()) v = rng.normal();
  return m;
}

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_PairwiseDistances(benchmark::State& state) {
  const auto x = points(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(epl::kernels::pairwise_sq_distances(x, exec_of(state)));
}

void BM_TsneGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto p = epl::kernels::pairwise_sq_distances(points(n, 8), Exec::Serial);
  double total = 0.0;
  for (auto& v : p.values()) total += v;
  for (auto& v : p.values()) v /= total;
  const auto y = points(n, 2, 11);
  epl::Matrix grad;
  for (auto _ : state) {
    epl::kernels::tsne_gradient(p, y, 1.0, grad, exec_of(state));
    benchmark::DoNotOptimize(grad.values().data());
  }
}

void BM_KnnSameLabel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = points(n, 2);
  std::vector<epl::Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<epl::Label>(i % 4);
  for (auto _ : state) benchmark::DoNotOptimize(epl::kernels::knn_same_label(x, labels, 10, exec_of(state)));
}

void BM_OpfSemi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = points(n, 2);
  epl::LabelVector seeds(n);
  for (std::size_t i = 0; i < 8; ++i) seeds.set(i * (n / 8), static_cast<epl::Label>(i % 4), epl::Provenance::True);
  for (auto _ : state) benchmark::DoNotOptimize(epl::opfsemi_propagate(x, seeds, exec_of(state)));
}

void BM_ContrastiveBatch(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  epl::EncoderShape shape;
  shape.input = 16;
  const auto params = epl::EncoderParams::scratch(shape, 3);
  epl::ViewBatch batch;
  batch.views = points(2 * b, 16);
  batch.source.resize(2 * b);
  for (auto _ : state) {
    benchmark::DoNotOptimize(epl::batch_gradient(epl::ContrastiveMode::SimCLR, params, batch, 0.07, exec_of(state)));
  }
}

void sizes(benchmark::internal::Benchmark* b, std::initializer_list<long> ns) {
  for (long n : ns) {
    b->Args({n, 0});
    b->Args({n, 1});
  }
  b->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_PairwiseDistances)->Apply([](auto* b) { sizes(b, {256, 1024}); });
BENCHMARK(BM_TsneGradient)->Apply([](auto* b) { sizes(b, {256, 1024}); });
BENCHMARK(BM_KnnSameLabel)->Apply([](auto* b) { sizes(b, {256, 1024}); });
BENCHMARK(BM_OpfSemi)->Apply([](auto* b) { sizes(b, {512, 2048}); });
BENCHMARK(BM_ContrastiveBatch)->Apply([](auto* b) { sizes(b, {32, 64}); });

BENCHMARK_MAIN();
