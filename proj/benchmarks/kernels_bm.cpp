#include <benchmark/benchmark.h>

#include "simopt/bench.hpp"

namespace {

using namespace simopt;

Backend pick(int variant) { return variant ? Backend::parallel() : Backend::sequential(); }

DenseVector filled(std::size_t n, std::uint64_t stream_id) {
  RngStream s{7, stream_id, {}};
  return uniform01(s, n);
}

void BM_Dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Backend be = pick(static_cast<int>(state.range(1)));
  const auto x = filled(n, 0), y = filled(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(dot(be, x, y));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n * 16));
}

void BM_Matvec(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Backend be = pick(static_cast<int>(state.range(1)));
  const std::size_t cols = 1000;
  const DenseMatrix a(rows, cols, filled(rows * cols, 2));
  const auto x = filled(cols, 3);
  for (auto _ : state) benchmark::DoNotOptimize(matvec(be, a, x));
}

void BM_MatvecT(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Backend be = pick(static_cast<int>(state.range(1)));
  const std::size_t cols = 1000;
  const DenseMatrix a(rows, cols, filled(rows * cols, 4));
  const auto x = filled(rows, 5);
  for (auto _ : state) benchmark::DoNotOptimize(matvec_t(be, a, x));
}

void BM_StandardNormal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Backend be = pick(static_cast<int>(state.range(1)));
  RngStream s{1, 1, {}};
  for (auto _ : state) benchmark::DoNotOptimize(standard_normal(s, n, be));
}

void BM_MeanVarEpoch(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Backend be = pick(static_cast<int>(state.range(1)));
  const auto task = bench::gen_meanvar_instance(d, {42, 0, {}});
  FwConfig config;
  config.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fw_run(task, config, be));
}

}  // namespace

BENCHMARK(BM_Dot)->ArgsProduct({{1 << 12, 1 << 16, 1 << 20}, {0, 1}});
BENCHMARK(BM_Matvec)->ArgsProduct({{25, 1000}, {0, 1}});
BENCHMARK(BM_MatvecT)->ArgsProduct({{25, 1000}, {0, 1}});
BENCHMARK(BM_StandardNormal)->ArgsProduct({{1 << 16, 1 << 20}, {0, 1}});
BENCHMARK(BM_MeanVarEpoch)->ArgsProduct({{5000, 50000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
