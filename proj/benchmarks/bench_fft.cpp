#include <adeb/fft.hpp>
#include <adeb/spectrum.hpp>
#include <adeb/synth.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace adeb;

namespace {

std::vector<double> noise(std::size_t cells) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> v(cells);
  for (auto& x : v) x = n(rng);
  return v;
}

void BM_Fft3(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dims3 d{n, n, n};
  const auto v = noise(d.cells());
  for (auto _ : state) benchmark::DoNotOptimize(fft3(v, d));
  state.SetItemsProcessed(state.iterations() * d.cells());
}
BENCHMARK(BM_Fft3)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_PowerSpectrum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dims3 d{n, n, n};
  const auto v = noise(d.cells());
  for (auto _ : state) benchmark::DoNotOptimize(power_spectrum(v, d));
  state.SetItemsProcessed(state.iterations() * d.cells());
}
BENCHMARK(BM_PowerSpectrum)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_VerifySpectrum(benchmark::State& state) {
  const auto f = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::temperature, {64, 64, 64}), 2);
  for (auto _ : state) benchmark::DoNotOptimize(verify_spectrum(f, f, 8.0));
}
BENCHMARK(BM_VerifySpectrum)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
