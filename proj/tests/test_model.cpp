#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ordlatent/error.hpp"
#include "ordlatent/model.hpp"
#include "ordlatent/numeric.hpp"

using namespace ordlatent;

namespace {

ModelConfig small_config(bool shared = true) { return {2, 2, 4, shared}; }

ParameterSet random_params(const ModelConfig& c, std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> gap(0.3, 1.5);
  ParameterSet p;
  for (int s = 0; s < c.num_threshold_sets(); ++s) {
    std::vector<double> t{n01(gen) - 1.5};
    for (int k = 1; k < c.num_cutpoints(); ++k) t.push_back(t.back() + gap(gen));
    p.thresholds.push_back(t);
  }
  for (int l = 0; l < c.p_x; ++l) p.loadings_x.push_back(1.0 + 0.5 * n01(gen));
  for (int l = 0; l < c.p_y; ++l) p.loadings_y.push_back(1.0 + 0.5 * n01(gen));
  p.rho = std::tanh(0.7 * n01(gen));
  return p;
}

ParameterSet single(double alpha_lo, double alpha_hi, double beta) {
  ParameterSet p;
  p.thresholds = {{alpha_lo, alpha_hi}};
  p.loadings_x = {beta};
  p.loadings_y = {beta};
  return p;
}

}  // namespace

TEST(ModelConfig, RejectsDegenerateShapes) {
  EXPECT_THROW((ModelConfig{0, 1, 2, true}).validate(), InvalidArgument);
  EXPECT_THROW((ModelConfig{1, 0, 2, true}).validate(), InvalidArgument);
  EXPECT_THROW((ModelConfig{1, 1, 1, true}).validate(), InvalidArgument);
  EXPECT_NO_THROW((ModelConfig{1, 1, 2, true}).validate());
}

TEST(ParameterSet, ValidateCatchesBadValues) {
  const ModelConfig c{1, 1, 3, true};
  ParameterSet p = single(-1.0, 1.0, 1.0);
  EXPECT_NO_THROW(p.validate(c));
  p.thresholds = {{1.0, 1.0}};
  EXPECT_THROW(p.validate(c), InvalidArgument);
  p = single(-1.0, 1.0, 1.0);
  p.rho = 1.0;
  EXPECT_THROW(p.validate(c), InvalidArgument);
  p.rho = 0.0;
  p.loadings_x = {NAN};
  EXPECT_THROW(p.validate(c), InvalidArgument);
  p = single(-1.0, 1.0, 1.0);
  p.loadings_y = {1.0, 2.0};
  EXPECT_THROW(p.validate(c), InvalidArgument);
}

TEST(CumulativeProb, TableOneAndTwoThresholds) {
  const ModelConfig c{1, 1, 5, true};
  ParameterSet s1;
  s1.thresholds = {{-4.60, -2.94, 0.85, 4.60}};
  s1.loadings_x = {0.0};
  s1.loadings_y = {0.0};
  EXPECT_NEAR(cumulative_prob(c, s1, 0, 0, {}), 0.01, 0.005);
  ParameterSet s2 = s1;
  s2.thresholds = {{-2.19, -1.39, 1.39, 2.19}};
  EXPECT_NEAR(cumulative_prob(c, s2, 0, 0, {}), 0.10, 0.005);
  EXPECT_EQ(cumulative_prob(c, s2, 1, 4, {3.0, -7.0}), 1.0);
}

TEST(CategoryProb, MiddleCategoryOfSymmetricThresholds) {
  const ModelConfig c{1, 1, 5, true};
  ParameterSet s2;
  s2.thresholds = {{-2.19, -1.39, 1.39, 2.19}};
  s2.loadings_x = {0.0};
  s2.loadings_y = {0.0};
  EXPECT_NEAR(category_prob(c, s2, 0, 2, {}), 0.60, 0.01);
}

TEST(CategoryProb, BinaryCaseEqualsCumulative) {
  const ModelConfig c{1, 1, 2, true};
  ParameterSet p;
  p.thresholds = {{0.3}};
  p.loadings_x = {1.2};
  p.loadings_y = {-0.4};
  for (double f : {-2.0, 0.0, 1.5}) {
    EXPECT_DOUBLE_EQ(category_prob(c, p, 0, 0, {f, f}), cumulative_prob(c, p, 0, 0, {f, f}));
    EXPECT_NEAR(std::exp(conditional_log_density(c, p, std::vector<int>{0, 1}, {f, -f})),
                logistic(0.3 + 1.2 * f) * (1.0 - logistic(0.3 + 0.4 * f)), 1e-14);
  }
}

TEST(CategoryProb, SumsToOneAndCumulativeIncreases) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n01;
  for (bool shared : {true, false}) {
    const ModelConfig c = small_config(shared);
    for (int trial = 0; trial < 50; ++trial) {
      const ParameterSet p = random_params(c, gen);
      const LatentPoint f{3.0 * n01(gen), 3.0 * n01(gen)};
      for (int l = 0; l < c.num_variables(); ++l) {
        double sum = 0.0;
        for (int s = 0; s < c.q; ++s) {
          sum += category_prob(c, p, l, s, f);
          if (s > 0) { EXPECT_GT(cumulative_prob(c, p, l, s, f), cumulative_prob(c, p, l, s - 1, f)); }
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(CumulativeProb, ProportionalOdds) {
  std::mt19937_64 gen(5);
  const ModelConfig c = small_config(false);
  const ParameterSet p = random_params(c, gen);
  for (int l = 0; l < c.num_variables(); ++l) {
    const double at0 = logit(cumulative_prob(c, p, l, 2, {})) - logit(cumulative_prob(c, p, l, 0, {}));
    for (double f : {-2.5, 0.7, 3.1}) {
      const double diff = logit(cumulative_prob(c, p, l, 2, {f, f})) - logit(cumulative_prob(c, p, l, 0, {f, f}));
      EXPECT_NEAR(diff, at0, 1e-10);
    }
  }
}

TEST(CumulativeProb, LinearPredictorIdentity) {
  // Moving beta * f into the threshold leaves the probability unchanged.
  const ModelConfig c{1, 1, 3, false};
  ParameterSet p;
  p.thresholds = {{-0.5, 0.8}, {0.0, 1.0}};
  p.loadings_x = {1.3};
  p.loadings_y = {0.9};
  const double f = 0.7;
  ParameterSet q = p;
  q.thresholds[0] = {-0.5 + 1.3 * f, 0.8 + 1.3 * f};
  q.loadings_x = {0.0};
  EXPECT_NEAR(cumulative_prob(c, p, 0, 0, {f, 0.0}), cumulative_prob(c, q, 0, 0, {}), 1e-15);
  EXPECT_NEAR(cumulative_prob(c, p, 0, 1, {f, 0.0}), cumulative_prob(c, q, 0, 1, {}), 1e-15);
}

TEST(CumulativeProb, StableAtExtremeShifts) {
  const ModelConfig c{1, 1, 3, true};
  ParameterSet p = single(-1.0, 1.0, 1.0);
  EXPECT_EQ(cumulative_prob(c, p, 0, 0, {800.0, 0.0}), 1.0);
  EXPECT_EQ(cumulative_prob(c, p, 0, 0, {-800.0, 0.0}), 0.0);
  EXPECT_TRUE(std::isfinite(conditional_log_density(c, p, std::vector<int>{2, 0}, {-60.0, 60.0})));
}

TEST(CumulativeProb, RejectsBadIndices) {
  const ModelConfig c{1, 1, 3, true};
  const ParameterSet p = single(-1.0, 1.0, 1.0);
  EXPECT_THROW(cumulative_prob(c, p, 0, 3, {}), InvalidArgument);
  EXPECT_THROW(cumulative_prob(c, p, 0, -1, {}), InvalidArgument);
  EXPECT_THROW(category_prob(c, p, 2, 0, {}), InvalidArgument);
  EXPECT_THROW(conditional_log_density(c, p, std::vector<int>{0}, {}), InvalidArgument);
  EXPECT_THROW(conditional_log_density(c, p, std::vector<int>{0, 3}, {}), InvalidArgument);
}

TEST(ConditionalLogDensity, MatchesDirectProduct) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n01;
  for (bool shared : {true, false}) {
    const ModelConfig c = small_config(shared);
    for (int trial = 0; trial < 40; ++trial) {
      const ParameterSet p = random_params(c, gen);
      std::vector<int> record(c.num_variables());
      for (auto& z : record) z = static_cast<int>(gen() % c.q);
      const LatentPoint f{2.0 * n01(gen), 2.0 * n01(gen)};
      double product = 1.0;
      for (int l = 0; l < c.num_variables(); ++l) product *= category_prob(c, p, l, record[l], f);
      const double value = conditional_log_density(c, p, record, f);
      EXPECT_NEAR(std::exp(value), product, 1e-13);
      EXPECT_NEAR(value, oracle::log_density(c, p, record, f.f_x, f.f_y), 1e-10);
      EXPECT_LE(value, 0.0);
    }
  }
}

TEST(ConditionalLogDensity, ZeroLoadingsIgnoreFactor) {
  const ModelConfig c{1, 1, 3, true};
  const ParameterSet p = single(-1.0, 1.0, 0.0);
  const std::vector<int> record{0, 2};
  EXPECT_DOUBLE_EQ(conditional_log_density(c, p, record, {}), conditional_log_density(c, p, record, {4.0, -3.0}));
}

TEST(CategoryTerms, DerivativesMatchFiniteDifferences) {
  const std::vector<double> cut{-1.2, 0.3, 1.9};
  for (int c = 0; c < 4; ++c) {
    for (double shift : {-3.0, -0.2, 0.4, 2.5}) {
      const CategoryTerms t = category_terms(cut, c, shift);
      const double h = 1e-6;
      const double ds = (category_terms(cut, c, shift + h).log_prob - category_terms(cut, c, shift - h).log_prob) / (2 * h);
      EXPECT_NEAR(t.score, ds, 1e-8);
      const double dw = (category_terms(cut, c, shift + h).score - category_terms(cut, c, shift - h).score) / (2 * h);
      EXPECT_NEAR(t.weight(), -dw, 1e-8);
      const double dk = (category_terms(cut, c, shift + h).weight() - category_terms(cut, c, shift - h).weight()) / (2 * h);
      EXPECT_NEAR(t.weight_slope(), dk, 1e-8);
      if (c < 3) {
        auto moved = cut;
        moved[c] += h;
        const double up = category_terms(moved, c, shift).log_prob;
        moved[c] -= 2 * h;
        EXPECT_NEAR(t.d_upper, (up - category_terms(moved, c, shift).log_prob) / (2 * h), 1e-7);
      }
      if (c > 0) {
        auto moved = cut;
        moved[c - 1] += h;
        const double up = category_terms(moved, c, shift).log_prob;
        moved[c - 1] -= 2 * h;
        EXPECT_NEAR(t.d_lower, (up - category_terms(moved, c, shift).log_prob) / (2 * h), 1e-7);
      }
    }
  }
}

TEST(SignConvention, ReflectingOneBlockFlipsRho) {
  ParameterSet p;
  p.thresholds = {{-1.0, 1.0}};
  p.loadings_x = {-1.0, -0.5};
  p.loadings_y = {0.8, 1.2};
  p.rho = 0.4;
  EXPECT_FALSE(p.satisfies_sign_convention());
  const ParameterSet q = apply_sign_convention(p);
  EXPECT_TRUE(q.satisfies_sign_convention());
  EXPECT_DOUBLE_EQ(q.rho, -0.4);
  EXPECT_EQ(q.loadings_x, (std::vector<double>{1.0, 0.5}));
  p.loadings_y = {-0.8, -1.2};
  const ParameterSet both = apply_sign_convention(p);
  EXPECT_DOUBLE_EQ(both.rho, 0.4);
}

TEST(Flatten, RoundTripAndNames) {
  std::mt19937_64 gen(3);
  for (bool shared : {true, false}) {
    const ModelConfig c = small_config(shared);
    const ParameterSet p = random_params(c, gen);
    const auto flat = flatten(p);
    ASSERT_EQ(static_cast<int>(flat.size()), num_parameters(c));
    EXPECT_EQ(unflatten(flat, c), p);
    const auto names = parameter_names(c);
    EXPECT_EQ(names.back(), "rho");
    EXPECT_EQ(flat[rho_index(c)], p.rho);
    EXPECT_EQ(flat[loading_index(3, c)], p.loadings_y[1]);
    EXPECT_EQ(flat[threshold_index(2, 1, c)], p.thresholds[shared ? 0 : 2][1]);
  }
  EXPECT_EQ(parameter_names(small_config(true))[0], "alpha[1]");
}

TEST(OrdinalDataset, OneBasedIngestionAndHelpers) {
  const ModelConfig c{1, 2, 3, true};
  const auto data = OrdinalDataset::from_one_based(c, {{1, 2, 3}, {3, 3, 1}});
  EXPECT_EQ(data.n(), 2);
  EXPECT_EQ(data.at(0, 2), 2);
  EXPECT_EQ(data.to_one_based(), (std::vector<std::vector<int>>{{1, 2, 3}, {3, 3, 1}}));
  EXPECT_EQ(data.reversed().to_one_based(), (std::vector<std::vector<int>>{{3, 2, 1}, {1, 1, 3}}));
  EXPECT_EQ(data.without_row(0).to_one_based(), (std::vector<std::vector<int>>{{3, 3, 1}}));
  EXPECT_EQ(data.distinct_categories(1), 2);
  EXPECT_THROW(OrdinalDataset::from_one_based(c, {{1, 2, 4}}), InvalidArgument);
  EXPECT_THROW(OrdinalDataset::from_one_based(c, {{0, 2, 3}}), InvalidArgument);
  EXPECT_THROW(OrdinalDataset::from_one_based(c, {{1, 2}}), InvalidArgument);
  EXPECT_THROW(OrdinalDataset::from_one_based(c, {}), InvalidArgument);
}
