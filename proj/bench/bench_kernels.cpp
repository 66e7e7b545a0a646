// Serial reference vs OpenMP kernels on a few seconds of synthetic speech-like audio.

#include <cmath>
#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "emomix/features.hpp"
#include "emomix/kernels.hpp"

namespace {

emomix::AudioBuffer make_audio(double seconds) {
  emomix::AudioBuffer a;
  const auto n = static_cast<std::size_t>(seconds * emomix::kPipelineSampleRate);
  a.samples.resize(n);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / emomix::kPipelineSampleRate;
    a.samples[i] = 0.3 * std::sin(2 * std::numbers::pi * 150.0 * t) +
                   0.1 * std::sin(2 * std::numbers::pi * 450.0 * t) + noise(rng);
  }
  return a;
}

const emomix::AudioBuffer& audio() {
  static const emomix::AudioBuffer a = make_audio(4.0);
  return a;
}

void BM_LldSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(emomix::kernels::compute_llds_serial(audio(), {}, {}));
  }
}
void BM_LldParallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(emomix::kernels::compute_llds(audio(), {}, {}));
  }
}
void BM_LogMelSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(emomix::kernels::compute_log_mel_serial(audio(), {}, emomix::kMelBands));
  }
}
void BM_LogMelParallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(emomix::kernels::compute_log_mel(audio(), {}, emomix::kMelBands));
  }
}

std::vector<double> random_rows(std::size_t n, std::size_t d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n * d);
  for (double& x : v) x = g(rng);
  return v;
}

void BM_DistSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_rows(n, 24, 1), b = random_rows(n, 24, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(emomix::kernels::pairwise_distances_serial(a, n, b, n, 24));
  }
}
void BM_DistParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_rows(n, 24, 1), b = random_rows(n, 24, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(emomix::kernels::pairwise_distances(a, n, b, n, 24));
  }
}

}  // namespace

BENCHMARK(BM_LldSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LldParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogMelSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogMelParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistSerial)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistParallel)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
