// Serial reference kernels against the OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>

#include "densitree/graph.hpp"
#include "densitree/kde.hpp"
#include "densitree/parallel.hpp"
#include "densitree/reference.hpp"

using namespace densitree;

namespace {

Matrix sample(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = z(rng);
  return x;
}

void BM_DensitySerial(benchmark::State& state) {
  const Matrix x = sample(static_cast<std::size_t>(state.range(0)), 5);
  const auto bw = Bandwidth::fixed(h_norm(x));
  for (auto _ : state) benchmark::DoNotOptimize(reference::density(x, x, KernelKind::Gaussian, bw));
}

void BM_DensityParallel(benchmark::State& state) {
  const Matrix x = sample(static_cast<std::size_t>(state.range(0)), 5);
  const auto bw = Bandwidth::fixed(h_norm(x));
  set_thread_count(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(density(x, x, KernelKind::Gaussian, bw));
  set_thread_count(0);
}

void BM_PairsSerial(benchmark::State& state) {
  const Matrix x = sample(static_cast<std::size_t>(state.range(0)), 8);
  const auto bw = Bandwidth::fixed(h_norm(x));
  for (auto _ : state) benchmark::DoNotOptimize(reference::pair_amplitudes(x, KernelKind::Gaussian, bw, 10));
}

void BM_PairsParallel(benchmark::State& state) {
  const Matrix x = sample(static_cast<std::size_t>(state.range(0)), 8);
  const auto bw = Bandwidth::fixed(h_norm(x));
  set_thread_count(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_pairs(x, KernelKind::Gaussian, bw, 10, 0.1));
  set_thread_count(0);
}

}  // namespace

BENCHMARK(BM_DensitySerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DensityParallel)->Args({500, 1})->Args({2000, 1})->Args({2000, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairsSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairsParallel)->Args({200, 1})->Args({200, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
