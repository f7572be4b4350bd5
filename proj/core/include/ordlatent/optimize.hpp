#pragma once

// Box-constrained quasi-Newton maximization.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ordlatent {

/// Returns f(x) and, when grad is non-null, writes the gradient. May throw
/// ordlatent::Error at infeasible points; the optimizer treats those as -inf.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct OptimizerOptions {
  double gradient_tolerance = 1e-6;  // infinity norm
  int max_iterations = 500;
  double max_step = 5.0;             // infinity-norm cap on a single trial step
  bool newton_polish = true;         // finish stalled runs with finite-difference Newton steps
  int max_polish_steps = 10;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool at_bound = false;
  std::vector<double> trace;  // objective at every accepted iterate
  std::string message;
};

/// BFGS with Armijo backtracking inside [lower, upper].
OptimizerResult maximize_bfgs(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper, const OptimizerOptions& opts = {});

/// Symmetrized central differences of the gradient.
Eigen::MatrixXd finite_difference_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-5);

}  // namespace ordlatent
