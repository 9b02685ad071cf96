#include <benchmark/benchmark.h>

#include "rankwatch/detector.hpp"
#include "rankwatch/numerics.hpp"
#include "rankwatch/random.hpp"
#include "rankwatch/tracker.hpp"

namespace {

using namespace rankwatch;

SymMatrix wishart(Index dim, Index n, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix x = rng.normal_matrix(dim, n);
  return SymMatrix::from_dense(x * x.transpose());
}

void BM_SymEig(benchmark::State& state) {
  const SymMatrix m = wishart(state.range(0), state.range(0) + 5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(m, {.want_vectors = false}));
}
BENCHMARK(BM_SymEig)->Arg(8)->Arg(32)->Arg(100);

void BM_LargestEigenvalue(benchmark::State& state) {
  const SymMatrix m = wishart(state.range(0), state.range(0) + 5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(largest_eigenvalue(m));
}
BENCHMARK(BM_LargestEigenvalue)->Arg(8)->Arg(32)->Arg(100);

// Per-sample cost of the streaming detector on null data, after the window fills.
void BM_DetectorStep(benchmark::State& state) {
  const Index dim = state.range(0);
  DetectorConfig cfg;
  cfg.window = 100;
  cfg.stride = state.range(1);
  cfg.drift = default_drift(dim, cfg.window);
  cfg.threshold = 1e300;
  MaxEigDetector det(dim, cfg);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) det.push(rng.normal_vector(dim));
  for (auto _ : state) benchmark::DoNotOptimize(det.push(rng.normal_vector(dim)));
}
BENCHMARK(BM_DetectorStep)
    ->Args({2, 1})
    ->Args({8, 4})
    ->Args({32, 4})
    ->Args({64, 4})
    ->Args({100, 4})
    ->Args({100, 1});

void BM_TrackerStep(benchmark::State& state) {
  const Index p = 100;
  TrackerConfig cfg;
  cfg.s = 10;
  SubspaceTracker tracker(p, cfg);
  Rng rng(4);
  StreamSample sample;
  sample.x = rng.normal_vector(p);
  if (state.range(0) != 0) {
    Mask mask(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) mask[static_cast<std::size_t>(i)] = rng.uniform() < 0.7;
    sample.mask = mask;
  }
  for (auto _ : state) {
    ++sample.t;
    benchmark::DoNotOptimize(tracker.push(sample));
  }
}
BENCHMARK(BM_TrackerStep)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
