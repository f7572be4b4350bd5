#include <vector>

#include <benchmark/benchmark.h>

#include "ordlatent/baselines.hpp"
#include "ordlatent/estimator.hpp"
#include "ordlatent/laplace.hpp"
#include "ordlatent/simulate.hpp"

using namespace ordlatent;

namespace {

const Scenario& s1() {
  static const Scenario s = builtin_scenario("S1", 0.5);
  return s;
}

void BM_SolveLatentScores(benchmark::State& state) {
  const OrdinalDataset data = sample_dataset(s1().params, s1().config, 30, 1);
  for (auto _ : state) {
    for (int i = 0; i < data.n(); ++i) benchmark::DoNotOptimize(solve_latent_scores(s1().config, s1().params, data.row(i)));
  }
  state.SetItemsProcessed(state.iterations() * data.n());
}
BENCHMARK(BM_SolveLatentScores);

void BM_LogLikelihoodWithGradient(benchmark::State& state) {
  const OrdinalDataset data = sample_dataset(s1().params, s1().config, static_cast<int>(state.range(0)), 2);
  LikelihoodSession session(data);
  Eigen::VectorXd grad;
  for (auto _ : state) benchmark::DoNotOptimize(session.evaluate(s1().params, &grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogLikelihoodWithGradient)->Arg(30)->Arg(300);

void BM_Fit(benchmark::State& state) {
  const OrdinalDataset data = sample_dataset(s1().params, s1().config, 30, 3);
  FitOptions opts;
  opts.compute_covariance = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, opts));
}
BENCHMARK(BM_Fit)->Unit(benchmark::kMillisecond);

void BM_BivariateNormalCdf(benchmark::State& state) {
  const double rho = state.range(0) / 100.0;
  double h = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bivariate_normal_cdf(h, 0.3, rho));
    h = h > 2.0 ? -2.0 : h + 0.01;
  }
}
BENCHMARK(BM_BivariateNormalCdf)->Arg(30)->Arg(80)->Arg(97);

void BM_Polychoric(benchmark::State& state) {
  const ContingencyTable t(3, 4, {25, 7, 3, 2, 8, 6, 9, 12, 1, 2, 5, 15});
  for (auto _ : state) benchmark::DoNotOptimize(polychoric(t));
}
BENCHMARK(BM_Polychoric)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
