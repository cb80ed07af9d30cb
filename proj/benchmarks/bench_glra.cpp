#include "glra/glra.hpp"
#include "glra/random.hpp"
#include "glra/rrr.hpp"
#include "glra/seqlab.hpp"

#include <benchmark/benchmark.h>

#include <array>

using namespace glra;

static void BM_Svd(benchmark::State& state) {
  const Index n = state.range(0);
  auto rng = random::engine(1);
  const Matrix a = random::gaussian(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(svd(a));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(8, 256)->Complexity();

static void BM_Pinv(benchmark::State& state) {
  const Index n = state.range(0);
  auto rng = random::engine(2);
  const Matrix a = random::low_rank(n, n, n / 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(pinv(a));
}
BENCHMARK(BM_Pinv)->RangeMultiplier(2)->Range(8, 256);

static void BM_Solve(benchmark::State& state) {
  const Index n = state.range(0);
  auto rng = random::engine(3);
  const GlraProblem p{random::gaussian(n, n, rng), random::gaussian(n, n / 2, rng),
                      random::gaussian(n / 2, n, rng), 4};
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_Solve)->RangeMultiplier(2)->Range(8, 128);

static void BM_AlsOracle(benchmark::State& state) {
  auto rng = random::engine(4);
  const GlraProblem p{random::gaussian(6, 6, rng), random::gaussian(6, 5, rng),
                      random::gaussian(5, 6, rng), 2};
  for (auto _ : state) benchmark::DoNotOptimize(als_oracle(p, AlsOptions{20, 200, 0}));
}
BENCHMARK(BM_AlsOracle)->Unit(benchmark::kMillisecond);

static void BM_Sweep(benchmark::State& state) {
  seqlab::SequenceSpec spec;
  spec.N = state.range(0);
  const std::array<Index, 1> dims{spec.N};
  const std::array<Index, 3> probes{10, 50, 100};
  for (auto _ : state) benchmark::DoNotOptimize(seqlab::unboundedness_sweep(spec, dims, probes));
}
BENCHMARK(BM_Sweep)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_BoundedSequence(benchmark::State& state) {
  seqlab::SequenceSpec spec;
  spec.N = state.range(0);
  const auto inst = seqlab::build_diagonal_family(spec);
  const auto chain = seqlab::coordinate_chain(spec.N, spec.N);
  for (auto _ : state) {
    benchmark::DoNotOptimize(seqlab::bounded_approximation_sequence(inst.problem, chain));
  }
}
BENCHMARK(BM_BoundedSequence)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_RrrFit(benchmark::State& state) {
  auto rng = random::engine(5);
  rrr::SampleSet s{random::gaussian(500, 8, rng), random::gaussian(500, 8, rng)};
  const auto cov = rrr::empirical_covariances(s);
  for (auto _ : state) benchmark::DoNotOptimize(rrr::fit(cov, 3, std::nullopt));
}
BENCHMARK(BM_RrrFit);

BENCHMARK_MAIN();
