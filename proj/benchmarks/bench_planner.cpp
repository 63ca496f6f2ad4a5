#include <adeb/planner.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace adeb;

namespace {

struct Instance {
  RateModel model;
  std::vector<PartitionFeatures> features;
  std::vector<double> C;
  PlanInputs inputs() const {
    PlanInputs in;
    in.features = features;
    in.model = &model;
    in.coefficients = C;
    return in;
  }
};

Instance make(std::size_t M) {
  Instance x;
  x.model.c = -1.1;
  std::mt19937_64 rng(M);
  std::lognormal_distribution<double> C(0.0, 1.0), n(5.0, 1.0);
  for (std::size_t m = 0; m < M; ++m) {
    x.features.push_back({m, 1.0, 32768, n(rng)});
    x.C.push_back(C(rng));
  }
  return x;
}

void BM_PlanFft(benchmark::State& state) {
  const auto x = make(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(plan_fft(x.inputs(), 1.0));
}
BENCHMARK(BM_PlanFft)->Arg(64)->Arg(512)->Arg(4096);

void BM_PlanHalo(benchmark::State& state) {
  const auto x = make(static_cast<std::size_t>(state.range(0)));
  double n = 0.0;
  for (const auto& f : x.features) n += f.n_ref;
  const double budget = 88.16 * n / 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(plan_halo(x.inputs(), budget));
}
BENCHMARK(BM_PlanHalo)->Arg(64)->Arg(512)->Arg(4096);

void BM_PlanCombined(benchmark::State& state) {
  const auto x = make(static_cast<std::size_t>(state.range(0)));
  const double fault = plan_fft(x.inputs(), 1.0).predicted_mass_fault;
  for (auto _ : state) benchmark::DoNotOptimize(plan_combined(x.inputs(), 1.0, 0.7 * fault));
}
BENCHMARK(BM_PlanCombined)->Arg(64)->Arg(512)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
