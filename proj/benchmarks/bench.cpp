#include <benchmark/benchmark.h>

#include <vector>

#include "bibeta/bayes.hpp"
#include "bibeta/density.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/sampling.hpp"

namespace {

using namespace bibeta;

const PairedSample& dataset() {
  static const PairedSample data = sample(AlphaParams(2, 7, 3, 1), 50, kDefaultSeed);
  return data;
}

void BM_Estimate(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const auto moments = empirical_moments(dataset());
  for (auto _ : state) benchmark::DoNotOptimize(estimate(method, moments));
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_Estimate)->DenseRange(0, 3);

void BM_EmpiricalMoments(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(empirical_moments(dataset()));
}
BENCHMARK(BM_EmpiricalMoments);

void BM_Density(benchmark::State& state) {
  const AlphaParams alpha(0.7, 0.9, 2, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(density(alpha, 0.3, 0.6));
}
BENCHMARK(BM_Density);

void BM_Sample(benchmark::State& state) {
  const AlphaParams alpha(2, 7, 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sample(alpha, static_cast<std::size_t>(state.range(0)), 1));
}
BENCHMARK(BM_Sample)->Arg(50)->Arg(1000);

void BM_LogPosteriorGradient(benchmark::State& state) {
  const auto data = sample(AlphaParams(2, 7, 3, 1), static_cast<std::size_t>(state.range(0)), 2);
  const AugmentedModel model(data, PriorSpec::gamma_iid());
  std::vector<double> q(model.dimension(), 0.1);
  std::vector<double> grad(q.size());
  for (auto _ : state) benchmark::DoNotOptimize(model.log_density(q, grad));
}
BENCHMARK(BM_LogPosteriorGradient)->Arg(50)->Arg(200);

void BM_Bootstrap(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(dataset(), Method::MM1, 200, 0.95, 3, 1));
}
BENCHMARK(BM_Bootstrap);

}  // namespace

BENCHMARK_MAIN();
