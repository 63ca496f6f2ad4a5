#include <adeb/features.hpp>
#include <adeb/halo.hpp>
#include <adeb/synth.hpp>

#include <benchmark/benchmark.h>

using namespace adeb;

namespace {

const Field3D& field128() {
  static const Field3D f =
      generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {128, 128, 128}), 1);
  return f;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const auto& f = field128();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pset = partition_field(f, {n, n, n});
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(pset, f));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_ExtractFeatures)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FindHalos(benchmark::State& state) {
  const auto& f = field128();
  for (auto _ : state) benchmark::DoNotOptimize(find_halos(f, 88.16, 176.32));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_FindHalos)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = SynthesisSpec::preset("heterogeneous", Role::baryon_density, {n, n, n});
  for (auto _ : state) benchmark::DoNotOptimize(generate_synthetic(spec, 1));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Synthesize)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
