#include <benchmark/benchmark.h>

#include "thresholds/thresholds.hpp"

using namespace thresholds;

namespace {

SimulationScenario mixed(std::size_t persons) {
  auto item = [](std::string id, SupportKind support, FamilyKind kind, DensityBranch branch,
                 std::vector<double> values) {
    ItemSpec s;
    s.id = std::move(id);
    s.support = support;
    s.family.kind = kind;
    s.family.values = std::move(values);
    s.treat_as = branch;
    return s;
  };
  const auto D = DensityBranch::Discrete;
  const auto C = DensityBranch::Continuous;
  std::vector<ItemSpec> items = {
      item("b", SupportKind::binary(), FamilyKind::Linear, D, {-0.3, 1.0}),
      item("o", SupportKind::ordinal(5), FamilyKind::FreeOrdinal, D, {-1.2, -0.4, 0.3, 1.1}),
      item("c", SupportKind::count(), FamilyKind::LogP1, D, {-0.5, 1.3}),
      item("y1", SupportKind::continuous(), FamilyKind::Linear, C, {0.4, 1.5}),
      item("y2", SupportKind::continuous(), FamilyKind::Linear, C, {-0.2, 0.8}),
  };
  SimulationScenario s;
  s.truth = FittedModel::from_item_values(items, ResponseFunctionKind::Normal, 1.1);
  s.persons = persons;
  s.seed = 1;
  return s;
}

void BM_GaussHermite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gauss_hermite(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_GaussHermite)->Arg(30)->Arg(120);

void BM_NormalCdf(benchmark::State& state) {
  double x = -6.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdf(ResponseFunctionKind::Normal, x));
    x = x > 6.0 ? -6.0 : x + 1e-3;
  }
}
BENCHMARK(BM_NormalCdf);

void BM_LoglikGradient(benchmark::State& state) {
  const auto sim = simulate_dataset(mixed(static_cast<std::size_t>(state.range(0))));
  LikelihoodOptions options;
  options.threads = static_cast<unsigned>(state.range(1));
  MarginalLikelihood lik(sim.data, ModelSpec{}, options);
  const auto u = starting_values(lik);
  for (auto _ : state) benchmark::DoNotOptimize(lik.evaluate(u, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LoglikGradient)->Args({1000, 1})->Args({1000, 4})->Args({10000, 1})->Args({10000, 4})->UseRealTime();

void BM_SampleContinuous(benchmark::State& state) {
  const auto d = DifficultyFunction::parametric(FamilyKind::Linear, 0.2, 1.3, SupportKind::continuous());
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_response(ResponseFunctionKind::Normal, d, DensityBranch::Continuous, 0.1, rng.uniform()));
  }
}
BENCHMARK(BM_SampleContinuous);

void BM_FitMixed(benchmark::State& state) {
  const auto sim = simulate_dataset(mixed(static_cast<std::size_t>(state.range(0))));
  FitOptions options;
  options.compute_standard_errors = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit(sim.data, ModelSpec{}, options));
}
BENCHMARK(BM_FitMixed)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
