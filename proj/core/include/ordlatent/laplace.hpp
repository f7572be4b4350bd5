#pragma once

// Laplace-approximated marginal log-likelihood.
//
// For observation z_i the joint log-density exponent is
//
//   h(F) = sum_l log P(Z_l = z_il | F) - F' R^{-1} F / 2,
//
// which is strictly concave in F for the cumulative-logit link. Its maximizer
// F_hat is the latent score; Gamma = -d^2 h / dF dF' at F_hat is the
// correction matrix, and
//
//   l_i = h(F_hat) - log det(Gamma) / 2 - log det(R) / 2.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ordlatent/model.hpp"

namespace ordlatent {

struct SolverOptions {
  double tolerance = 1e-9;  // on the fixed-point residual |R grad h(F)|
  int max_iterations = 200;
  double damping = 1.0;     // relaxation of the fixed-point update, in (0, 1]

  void validate() const;
};

struct LatentSolution {
  LatentPoint f_hat;
  Eigen::Matrix2d gamma = Eigen::Matrix2d::Identity();
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
};

Eigen::Matrix2d latent_correlation(double rho);
Eigen::Matrix2d latent_precision(double rho);

/// h(F) for one record.
double joint_log_exponent(const ModelConfig& config, const ParameterSet& params,
                          std::span<const int> record, LatentPoint f);

/// Gradient of h with respect to F.
Eigen::Vector2d joint_log_exponent_gradient(const ModelConfig& config, const ParameterSet& params,
                                            std::span<const int> record, LatentPoint f);

/// Right-hand side of the latent-score fixed-point equation,
/// R * sum_l beta_l * d log P_l / d shift * e_block(l). F_hat is a fixed point.
LatentPoint latent_score_map(const ModelConfig& config, const ParameterSet& params,
                             std::span<const int> record, LatentPoint f);

/// Maximizes h. Damped fixed-point iteration on the score equation, switching
/// to safeguarded Newton steps once the residual ratio exceeds 0.5. Returns an
/// unconverged solution rather than throwing when max_iterations is reached;
/// throws NumericalError on non-finite intermediate values.
LatentSolution solve_latent_scores(const ModelConfig& config, const ParameterSet& params,
                                   std::span<const int> record, const SolverOptions& opts = {},
                                   LatentPoint start = {});

/// Gamma = R^{-1} + diag(sum_l beta_l^2 w_l) at f_hat (the negative Hessian of h).
/// Throws NumericalError if the result is not positive definite.
Eigen::Matrix2d correction_matrix(const ModelConfig& config, const ParameterSet& params,
                                  std::span<const int> record, LatentPoint f_hat);

/// log det of a symmetric positive-definite 2x2 matrix.
double log_det_spd2(const Eigen::Matrix2d& m);

/// Log of the Laplace approximation to integral exp(t * g(x)) dx over R^m,
/// given g at its maximum and -Hessian of g there.
double laplace_log_integral(double peak_value, const Eigen::MatrixXd& neg_hessian, double t = 1.0);

/// Laplace log-likelihood contribution of one record at a converged solution.
/// When natural_gradient is non-null it is incremented by the gradient of the
/// contribution with respect to the natural parameter vector (flatten order),
/// including the dependence of F_hat and Gamma on the parameters.
double observation_log_likelihood(const ModelConfig& config, const ParameterSet& params,
                                  std::span<const int> record, const LatentSolution& solution,
                                  Eigen::VectorXd* natural_gradient = nullptr);

double approx_log_likelihood(const OrdinalDataset& data, const ParameterSet& params,
                             const SolverOptions& opts = {});

/// Gradient with respect to the natural parameters (thresholds, loadings, rho).
Eigen::VectorXd approx_log_likelihood_natural_gradient(const OrdinalDataset& data,
                                                       const ParameterSet& params,
                                                       const SolverOptions& opts = {});

/// Gradient with respect to the unconstrained coordinates of to_unconstrained().
Eigen::VectorXd approx_log_likelihood_gradient(const OrdinalDataset& data, const ParameterSet& params,
                                               const SolverOptions& opts = {});

/// Objective evaluator for one fitting session. Caches latent scores and
/// warm-starts the next evaluation from them. Not thread-safe; use one
/// session per fit.
class LikelihoodSession {
 public:
  explicit LikelihoodSession(const OrdinalDataset& data, SolverOptions opts = {});

  double evaluate(const ParameterSet& params, Eigen::VectorXd* natural_gradient = nullptr);

  /// Per-observation natural gradients, n x k.
  Eigen::MatrixXd observation_gradients(const ParameterSet& params);

  const std::vector<LatentPoint>& scores() const noexcept { return warm_; }
  int evaluations() const noexcept { return evaluations_; }
  void reset();

 private:
  LatentSolution solve(int i, const ParameterSet& params);

  const OrdinalDataset* data_;
  SolverOptions opts_;
  std::vector<LatentPoint> warm_;
  bool have_warm_ = false;
  int evaluations_ = 0;
};

}  // namespace ordlatent
