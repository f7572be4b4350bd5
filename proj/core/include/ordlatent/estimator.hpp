#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ordlatent/laplace.hpp"
#include "ordlatent/model.hpp"
#include "ordlatent/parameterization.hpp"

namespace ordlatent {

inline constexpr std::uint64_t kDefaultSeed = 20090315;

struct FitOptions {
  double outer_tolerance = 1e-6;  // gradient infinity norm in unconstrained coordinates
  int max_outer_iterations = 500;
  int n_starts = 3;
  std::uint64_t seed = kDefaultSeed;
  SolverOptions inner;
  /// Replaces the first start when set (bootstrap refits start from the original estimate).
  std::optional<ParameterSet> initial;
  bool compute_covariance = true;
  /// Box on every unconstrained coordinate. Ending on it counts as non-convergence.
  double bound = 50.0;

  void validate() const;
};

struct StartRecord {
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;

  friend bool operator==(const StartRecord&, const StartRecord&) = default;
};

struct FitResult {
  ModelConfig config;
  ParameterSet params;
  double log_likelihood = 0.0;
  /// Sandwich covariance of the natural parameters (flatten order); empty when
  /// unavailable, see covariance_status.
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd covariance_unconstrained;
  std::string covariance_status = "not computed";
  std::vector<LatentPoint> scores;
  bool converged = false;
  /// False when every loading of one block is numerically zero; rho then has no meaning.
  bool rho_identified = true;
  bool multimodal = false;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  int best_start = 0;
  std::vector<StartRecord> starts;
  /// Objective at every accepted outer iterate of the winning start.
  std::vector<double> trace;
};

/// Throws UnidentifiedError if any variable shows fewer than two categories.
void check_identifiable(const OrdinalDataset& data);

/// Starting values: thresholds from the logit of pooled (or per-variable)
/// cumulative category proportions, unit loadings (perturbed for start > 0),
/// rho from the Spearman correlation of per-observation block mean scores.
ParameterSet initial_parameters(const OrdinalDataset& data, int start, std::uint64_t seed);

/// Maximizes the Laplace log-likelihood over the constrained parameter space
/// from opts.n_starts starting points and returns the best converged optimum,
/// with the loading sign convention applied. Throws ConvergenceError when no
/// start converges.
FitResult fit(const OrdinalDataset& data, const FitOptions& opts = {});

struct SandwichCovariance {
  Eigen::MatrixXd unconstrained;        // J^{-1} I J^{-1}
  Eigen::MatrixXd natural;              // delta-method image of the above
  Eigen::MatrixXd model_based;          // -J^{-1} on the natural scale (I = J)
  Eigen::MatrixXd hessian;              // J, unconstrained
  Eigen::MatrixXd score_outer_product;  // I, unconstrained
  double condition_number = 0.0;
};

/// Sandwich covariance at a converged optimum. J comes from central
/// differences of the analytic gradient, I from per-observation gradient
/// outer products. Throws NumericalError when J is not negative definite or its
/// condition number exceeds 1e12.
SandwichCovariance sandwich_covariance(const OrdinalDataset& data, const ParameterSet& params,
                                       const SolverOptions& opts = {});

}  // namespace ordlatent
