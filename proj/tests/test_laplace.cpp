#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ordlatent/error.hpp"
#include "ordlatent/laplace.hpp"
#include "ordlatent/parameterization.hpp"

using namespace ordlatent;

namespace {

ParameterSet zero_loadings(const ModelConfig& c, std::vector<double> cut, double rho) {
  ParameterSet p;
  p.thresholds = {std::move(cut)};
  p.loadings_x.assign(c.p_x, 0.0);
  p.loadings_y.assign(c.p_y, 0.0);
  p.rho = rho;
  return p;
}

ParameterSet s2_params() {
  ParameterSet p;
  p.thresholds = {{-2.19, -1.39, 1.39, 2.19}};
  p.loadings_x = {1.60, 1.75, 1.70, 1.30, 1.50};
  p.loadings_y = {5.0, 9.0, 9.0, 5.0, 6.0};
  p.rho = 0.5;
  return p;
}

}  // namespace

TEST(SolveLatentScores, ZeroLoadingsGivePriorMean) {
  const ModelConfig c{2, 2, 3, true};
  const ParameterSet p = zero_loadings(c, {-0.5, 0.5}, 0.3);
  const auto sol = solve_latent_scores(c, p, std::vector<int>{0, 2, 1, 1}, {}, {1.0, -2.0});
  ASSERT_TRUE(sol.converged);
  EXPECT_NEAR(sol.f_hat.f_x, 0.0, 1e-12);
  EXPECT_NEAR(sol.f_hat.f_y, 0.0, 1e-12);
  EXPECT_TRUE(sol.gamma.isApprox(latent_precision(0.3), 1e-12));
  EXPECT_TRUE(correction_matrix(c, p, std::vector<int>{0, 2, 1, 1}, {}).isApprox(latent_precision(0.3), 1e-14));
}

TEST(SolveLatentScores, ReversalSymmetryUnderSymmetricThresholds) {
  const ModelConfig c{5, 5, 5, true};
  const ParameterSet p = s2_params();
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto record = fixture::random_record(c, gen);
    std::vector<int> reversed(record);
    for (auto& z : reversed) z = c.q - 1 - z;
    const auto a = solve_latent_scores(c, p, record);
    const auto b = solve_latent_scores(c, p, reversed);
    ASSERT_TRUE(a.converged && b.converged);
    EXPECT_NEAR(a.f_hat.f_x, -b.f_hat.f_x, 1e-9);
    EXPECT_NEAR(a.f_hat.f_y, -b.f_hat.f_y, 1e-9);
  }
}

TEST(SolveLatentScores, MatchesGridArgmax) {
  const ModelConfig c{2, 2, 3, true};
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 6; ++trial) {
    const ParameterSet p = fixture::random_params(c, gen);
    const auto record = fixture::random_record(c, gen);
    const auto sol = solve_latent_scores(c, p, record);
    ASSERT_TRUE(sol.converged);
    const Eigen::Vector2d grid = oracle::grid_argmax(c, p, record);
    EXPECT_NEAR(sol.f_hat.f_x, grid[0], 1e-3);
    EXPECT_NEAR(sol.f_hat.f_y, grid[1], 1e-3);
  }
}

TEST(SolveLatentScores, FixedPointAndNegativeDefiniteHessian) {
  std::mt19937_64 gen(44);
  for (bool shared : {true, false}) {
    const ModelConfig c{3, 2, 4, shared};
    for (int trial = 0; trial < 25; ++trial) {
      const ParameterSet p = fixture::random_params(c, gen, 1.5);
      const auto record = fixture::random_record(c, gen);
      const auto sol = solve_latent_scores(c, p, record);
      ASSERT_TRUE(sol.converged);
      EXPECT_LE(sol.residual_norm, 1e-9);
      const LatentPoint mapped = latent_score_map(c, p, record, sol.f_hat);
      EXPECT_NEAR(mapped.f_x, sol.f_hat.f_x, 1e-9);
      EXPECT_NEAR(mapped.f_y, sol.f_hat.f_y, 1e-9);
      EXPECT_NEAR(sol.gamma(0, 1), sol.gamma(1, 0), 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sol.gamma);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    }
  }
}

TEST(SolveLatentScores, ConvergesForLargeLoadings) {
  const ModelConfig c{5, 5, 5, true};
  ParameterSet p = s2_params();
  p.loadings_y = {15.0, 25.0, 30.0, 12.0, 20.0};
  p.rho = -0.9;
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sol = solve_latent_scores(c, p, fixture::random_record(c, gen));
    EXPECT_TRUE(sol.converged);
  }
}

TEST(SolveLatentScores, ConvergesQuicklyNearUnitCorrelation) {
  const ModelConfig c{5, 5, 5, true};
  ParameterSet p = s2_params();
  p.loadings_y = {6.5, 11.0, 12.0, 6.5, 7.5};
  std::mt19937_64 gen(6);
  for (double theta : {6.0, 9.0, 12.0}) {
    p.rho = std::tanh(theta);
    for (int trial = 0; trial < 50; ++trial) {
      const auto record = fixture::random_record(c, gen);
      const auto sol = solve_latent_scores(c, p, record);
      EXPECT_TRUE(sol.converged) << theta;
      EXPECT_LT(sol.iterations, 40) << theta;
      const LatentPoint mapped = latent_score_map(c, p, record, sol.f_hat);
      EXPECT_LE(std::hypot(mapped.f_x - sol.f_hat.f_x, mapped.f_y - sol.f_hat.f_y), 1e-8) << theta;
    }
  }
}

TEST(SolveLatentScores, ReportsNonConvergence) {
  const ModelConfig c{2, 2, 3, true};
  std::mt19937_64 gen(2);
  const ParameterSet p = fixture::random_params(c, gen, 2.0);
  SolverOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 1e-15;
  const auto sol = solve_latent_scores(c, p, std::vector<int>{0, 2, 0, 2}, opts, {3.0, -3.0});
  EXPECT_FALSE(sol.converged);
  const OrdinalDataset data(c, 1, {0, 2, 0, 2});
  try {
    approx_log_likelihood(data, p, opts);
    FAIL() << "expected InnerSolveError";
  } catch (const InnerSolveError& e) {
    EXPECT_EQ(e.observation(), 0);
  }
  SolverOptions bad;
  bad.damping = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(CorrectionMatrix, MatchesFiniteDifferenceHessian) {
  std::mt19937_64 gen(55);
  for (bool shared : {true, false}) {
    const ModelConfig c{2, 3, 4, shared};
    for (int trial = 0; trial < 25; ++trial) {
      const ParameterSet p = fixture::random_params(c, gen, 1.0);
      const auto record = fixture::random_record(c, gen);
      const auto sol = solve_latent_scores(c, p, record);
      auto h = [&](const Eigen::VectorXd& f) { return oracle::joint_exponent(c, p, record, f[0], f[1]); };
      const Eigen::MatrixXd fd = -oracle::fd_hessian(h, Eigen::Vector2d(sol.f_hat.f_x, sol.f_hat.f_y), 1e-4);
      const Eigen::Matrix2d gamma = correction_matrix(c, p, record, sol.f_hat);
      EXPECT_LE((gamma - fd).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, gamma.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(CorrectionMatrix, DiagonalWhenRhoIsZero) {
  const ModelConfig c{2, 2, 3, true};
  std::mt19937_64 gen(9);
  ParameterSet p = fixture::random_params(c, gen);
  p.rho = 0.0;
  const auto record = fixture::random_record(c, gen);
  const auto sol = solve_latent_scores(c, p, record);
  EXPECT_EQ(correction_matrix(c, p, record, sol.f_hat)(0, 1), 0.0);
}

TEST(LogDet, StabilizedClosedForm) {
  Eigen::Matrix2d m;
  m << 4.0, 1.9999, 1.9999, 1.0;
  EXPECT_NEAR(log_det_spd2(m), std::log(m.determinant()), 1e-9);
  m << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(log_det_spd2(m), NumericalError);
}

TEST(ApproxLogLikelihood, ZeroLoadingsReduceToMarginals) {
  const ModelConfig c{2, 1, 3, true};
  const ParameterSet p = zero_loadings(c, {-0.4, 0.9}, 0.6);
  const auto data = OrdinalDataset::from_one_based(c, {{1, 2, 3}, {3, 3, 1}, {2, 1, 2}});
  double expected = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    for (int l = 0; l < 3; ++l) {
      const int z = data.at(i, l);
      const double up = z < 2 ? 1.0 / (1.0 + std::exp(-p.thresholds[0][z])) : 1.0;
      const double lo = z > 0 ? 1.0 / (1.0 + std::exp(-p.thresholds[0][z - 1])) : 0.0;
      expected += std::log(up - lo);
    }
  }
  EXPECT_NEAR(approx_log_likelihood(data, p), expected, 1e-12);
  const Eigen::VectorXd g = approx_log_likelihood_natural_gradient(data, p);
  EXPECT_NEAR(g[rho_index(c)], 0.0, 1e-12);
}

TEST(ApproxLogLikelihood, PerObservationEqualsGenericLaplace) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelConfig c{1 + static_cast<int>(gen() % 3), 1 + static_cast<int>(gen() % 3),
                        2 + static_cast<int>(gen() % 4), gen() % 2 == 0};
    const ParameterSet p = fixture::random_params(c, gen, 1.0);
    const auto record = fixture::random_record(c, gen);
    const auto sol = solve_latent_scores(c, p, record);
    const double assembled = observation_log_likelihood(c, p, record, sol);
    const Eigen::Vector2d f(sol.f_hat.f_x, sol.f_hat.f_y);
    const double h = conditional_log_density(c, p, record, sol.f_hat) - 0.5 * f.dot(latent_precision(p.rho) * f);
    const double log_prior_constant = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(1.0 - p.rho * p.rho);
    const double generic = laplace_log_integral(h + log_prior_constant, sol.gamma, 1.0);
    EXPECT_NEAR(assembled, generic, 1e-10);
  }
}

TEST(ApproxLogLikelihood, CloseToQuadratureOracle) {
  const ModelConfig c{1, 1, 3, true};
  const auto data = OrdinalDataset::from_one_based(c, {{1, 1}, {2, 3}, {3, 3}, {2, 2}, {1, 2}});
  const std::vector<ParameterSet> cases = {
      {{{-1.0, 1.0}}, {1.0}, {1.0}, 0.3},
      {{{-0.5, 1.5}}, {2.0}, {0.7}, -0.6},
      {{{-2.0, 0.2}}, {0.4}, {1.5}, 0.8},
  };
  for (const auto& p : cases) {
    double exact = 0.0;
    for (int i = 0; i < data.n(); ++i) exact += oracle::exact_record_log_likelihood(c, p, data.row(i), 60);
    const double approx = approx_log_likelihood(data, p);
    EXPECT_LE(std::abs(approx - exact), 0.02 * std::abs(exact)) << approx << " vs " << exact;
  }
}

TEST(ApproxLogLikelihoodGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 15; ++trial) {
    const ModelConfig c{2, 2, 3 + static_cast<int>(gen() % 2), trial % 2 == 0};
    const ParameterSet p = fixture::random_params(c, gen, 0.8);
    const auto data = fixture::random_dataset(c, 6, gen);
    const Eigen::VectorXd theta = to_unconstrained(p, c);
    const Eigen::VectorXd analytic = approx_log_likelihood_gradient(data, p);
    auto f = [&](const Eigen::VectorXd& t) { return approx_log_likelihood(data, decode_unconstrained(t, c)); };
    const Eigen::VectorXd fd = oracle::fd_gradient(f, theta, 1e-5);
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      EXPECT_LE(std::abs(analytic[j] - fd[j]), 1e-4 * std::max(1.0, std::abs(fd[j]))) << "coordinate " << j;
    }
  }
}

TEST(ApproxLogLikelihood, InvariantToSingleBlockReflection) {
  std::mt19937_64 gen(12);
  const ModelConfig c{2, 3, 4, false};
  const ParameterSet p = fixture::random_params(c, gen);
  const auto data = fixture::random_dataset(c, 8, gen);
  ParameterSet q = p;
  for (auto& b : q.loadings_x) b = -b;
  q.rho = -q.rho;
  EXPECT_NEAR(approx_log_likelihood(data, p), approx_log_likelihood(data, q), 1e-10);
}

TEST(LikelihoodSession, WarmStartMatchesColdStart) {
  std::mt19937_64 gen(13);
  const ModelConfig c{3, 3, 4, true};
  const ParameterSet p = fixture::random_params(c, gen);
  ParameterSet nearby = p;
  nearby.rho = std::tanh(std::atanh(p.rho) + 0.05);
  nearby.loadings_y[0] += 0.1;
  const auto data = fixture::random_dataset(c, 20, gen);
  LikelihoodSession session(data);
  session.evaluate(p);
  const double warm = session.evaluate(nearby);
  const double cold = approx_log_likelihood(data, nearby);
  EXPECT_LE(std::abs(warm - cold), 1e-10 * std::abs(cold));
}

TEST(LikelihoodSession, ObservationGradientsSumToTotal) {
  std::mt19937_64 gen(14);
  const ModelConfig c{2, 3, 3, false};
  const ParameterSet p = fixture::random_params(c, gen);
  const auto data = fixture::random_dataset(c, 9, gen);
  LikelihoodSession session(data);
  Eigen::VectorXd total;
  const double value = session.evaluate(p, &total);
  EXPECT_NEAR(value, approx_log_likelihood(data, p), 1e-12);
  const Eigen::MatrixXd rows = session.observation_gradients(p);
  ASSERT_EQ(rows.rows(), data.n());
  EXPECT_LE((rows.colwise().sum().transpose() - total).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(session.scores().size(), static_cast<std::size_t>(data.n()));
}
