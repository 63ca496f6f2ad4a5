#include <adeb/archive.hpp>
#include <adeb/codec.hpp>
#include <adeb/planner.hpp>
#include <adeb/synth.hpp>

#include <benchmark/benchmark.h>

using namespace adeb;

namespace {

const Field3D& field64() {
  static const Field3D f =
      generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {64, 64, 64}), 1);
  return f;
}

// eb as a fraction of 1000 (density units)
void BM_CompressBlock(benchmark::State& state) {
  const auto& f = field64();
  const double eb = state.range(0) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(compress_block(f.values(), f.dims(), eb));
  state.SetItemsProcessed(state.iterations() * f.size());
  state.counters["bits_per_cell"] = measure_bitrate(compress_block(f.values(), f.dims(), eb));
}
BENCHMARK(BM_CompressBlock)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_DecompressBlock(benchmark::State& state) {
  const auto& f = field64();
  const auto block = compress_block(f.values(), f.dims(), state.range(0) / 1000.0);
  for (auto _ : state) benchmark::DoNotOptimize(decompress_block(block));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_DecompressBlock)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_CompressField(benchmark::State& state) {
  const auto& f = field64();
  const auto threads = static_cast<unsigned>(state.range(0));
  const auto plan = plan_uniform(1.0, 8);
  for (auto _ : state) benchmark::DoNotOptimize(compress_field(f, {32, 32, 32}, plan, threads));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_CompressField)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
