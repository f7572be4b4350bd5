#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "ordlatent/error.hpp"
#include "ordlatent/simulate.hpp"

using namespace ordlatent;

namespace {

double logistic_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> block_means(const OrdinalDataset& d, bool x_block) {
  const ModelConfig& c = d.config();
  std::vector<double> out(d.n(), 0.0);
  for (int i = 0; i < d.n(); ++i) {
    const int from = x_block ? 0 : c.p_x;
    const int to = x_block ? c.p_x : c.num_variables();
    for (int l = from; l < to; ++l) out[i] += d.at(i, l);
  }
  return out;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = a.size();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Sample, ZeroLoadingMarginalsMatchLogistic) {
  const ModelConfig c{2, 1, 5, true};
  ParameterSet p;
  p.thresholds = {{-1.5, -0.3, 0.4, 2.0}};
  p.loadings_x = {0.0, 0.0};
  p.loadings_y = {0.0};
  p.rho = 0.3;
  const int n = 100000;
  const OrdinalDataset d = sample_dataset(p, c, n, 77);
  for (int l = 0; l < 3; ++l) {
    std::vector<double> count(5, 0.0);
    for (int i = 0; i < n; ++i) count[d.at(i, l)] += 1.0;
    double chi2 = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double hi = k < 4 ? logistic_ref(p.thresholds[0][k]) : 1.0;
      const double lo = k > 0 ? logistic_ref(p.thresholds[0][k - 1]) : 0.0;
      const double expected = n * (hi - lo);
      EXPECT_NEAR(count[k] / n, hi - lo, 0.01);
      chi2 += (count[k] - expected) * (count[k] - expected) / expected;
    }
    // Upper 0.1% point of chi-square with 4 degrees of freedom.
    EXPECT_LT(chi2, 18.467);
  }
}

TEST(Sample, IndependentBlocksAtZeroRho) {
  const Scenario s = builtin_scenario("S2", 0.0);
  const int n = 20000;
  const OrdinalDataset d = sample_dataset(s.params, s.config, n, 3);
  EXPECT_LT(std::abs(correlation(block_means(d, true), block_means(d, false))), 3.0 / std::sqrt(n));
}

TEST(Sample, CorrelationSignFollowsRho) {
  const Scenario pos = builtin_scenario("S2", 0.7);
  const Scenario neg = builtin_scenario("S2", -0.7);
  const OrdinalDataset a = sample_dataset(pos.params, pos.config, 5000, 4);
  const OrdinalDataset b = sample_dataset(neg.params, neg.config, 5000, 4);
  EXPECT_GT(correlation(block_means(a, true), block_means(a, false)), 0.3);
  EXPECT_LT(correlation(block_means(b, true), block_means(b, false)), -0.3);
}

TEST(Sample, DeterministicAndSeedSensitive) {
  const Scenario s = builtin_scenario("S1", 0.5);
  EXPECT_EQ(sample_dataset(s.params, s.config, 50, 9), sample_dataset(s.params, s.config, 50, 9));
  EXPECT_NE(sample_dataset(s.params, s.config, 50, 9), sample_dataset(s.params, s.config, 50, 10));
  // Observation streams do not depend on n.
  const OrdinalDataset small = sample_dataset(s.params, s.config, 10, 9);
  const OrdinalDataset big = sample_dataset(s.params, s.config, 50, 9);
  for (int i = 0; i < 10; ++i) {
    for (int l = 0; l < 10; ++l) EXPECT_EQ(small.at(i, l), big.at(i, l));
  }
}

TEST(Sample, SymmetricThresholdsGiveReversalSymmetry) {
  const Scenario s = builtin_scenario("S2", 0.4);
  const int n = 40000;
  const OrdinalDataset d = sample_dataset(s.params, s.config, n, 21);
  const OrdinalDataset r = d.reversed();
  const OrdinalDataset fresh = sample_dataset(s.params, s.config, n, 22);
  for (int l = 0; l < 10; ++l) {
    std::vector<double> a(5, 0.0);
    std::vector<double> b(5, 0.0);
    for (int i = 0; i < n; ++i) {
      a[r.at(i, l)] += 1.0 / n;
      b[fresh.at(i, l)] += 1.0 / n;
    }
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(a[k], b[k], 0.015) << l << " " << k;
  }
}

TEST(Scenario, BuiltinValues) {
  const Scenario s1 = builtin_scenario("S1", 0.5);
  EXPECT_EQ(s1.name, "S1");
  EXPECT_EQ(s1.n, 30);
  EXPECT_EQ(s1.n_reps, 500);
  EXPECT_EQ(s1.params.thresholds[0], (std::vector<double>{-4.60, -2.94, 0.85, 4.60}));
  EXPECT_EQ(s1.params.loadings_y, (std::vector<double>{5, 9, 9, 5, 6}));
  const Scenario s2 = builtin_scenario("s2", -0.5);
  EXPECT_EQ(s2.name, "S2");
  EXPECT_EQ(s2.params.thresholds[0], (std::vector<double>{-2.19, -1.39, 1.39, 2.19}));
  EXPECT_EQ(s2.params.loadings_x, (std::vector<double>{1.60, 1.75, 1.70, 1.30, 1.50}));
  EXPECT_THROW(builtin_scenario("S3", 0.0), InvalidArgument);
  EXPECT_THROW(builtin_scenario("S1", 1.0), InvalidArgument);
}

TEST(Sample, InvalidInputs) {
  const Scenario s = builtin_scenario("S1", 0.5);
  EXPECT_THROW(sample_dataset(s.params, s.config, 0, 1), InvalidArgument);
  ParameterSet bad = s.params;
  bad.thresholds[0][1] = -5.0;
  EXPECT_THROW(sample_dataset(bad, s.config, 10, 1), InvalidArgument);
}

TEST(BiasSummary, Quartiles) {
  const BiasSummary b = summarize_bias("rho", 1.0, {1.0, 2.0, 3.0, 4.0, 5.0, 30.0});
  EXPECT_DOUBLE_EQ(b.median, 2.5);
  EXPECT_DOUBLE_EQ(b.q1, 1.25);
  EXPECT_DOUBLE_EQ(b.q3, 3.75);
  EXPECT_EQ(b.outliers, 1);
  EXPECT_DOUBLE_EQ(b.upper_whisker, 4.0);
  EXPECT_DOUBLE_EQ(b.lower_whisker, 0.0);
  EXPECT_DOUBLE_EQ(b.mean, 39.0 / 6.0);
}

TEST(MonteCarlo, ReproducibleAcrossThreadCounts) {
  Scenario s = builtin_scenario("S1", 0.5);
  s.n_reps = 3;
  MonteCarloOptions o;
  o.threads = 1;
  const MonteCarloReport a = run_monte_carlo(s, 5, o);
  o.threads = 3;
  const MonteCarloReport b = run_monte_carlo(s, 5, o);
  ASSERT_EQ(a.replicates.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(a.replicates[r].ok, b.replicates[r].ok);
    EXPECT_EQ(a.replicates[r].estimates, b.replicates[r].estimates);
    EXPECT_EQ(a.replicates[r].fisher_lower, b.replicates[r].fisher_lower);
  }
  EXPECT_EQ(a.rho_estimates, b.rho_estimates);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_EQ(a.bias.size(), a.truth.size());
}

TEST(MonteCarlo, InvalidInputs) {
  Scenario s = builtin_scenario("S1", 0.5);
  s.n_reps = 0;
  EXPECT_THROW(run_monte_carlo(s, 1), InvalidArgument);
  s.n_reps = 2;
  s.n = 3;
  EXPECT_THROW(run_monte_carlo(s, 1), InvalidArgument);
}
