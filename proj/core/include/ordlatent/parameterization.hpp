#pragma once

// Map between the constrained parameter space and R^k.
//
// Each threshold sequence is stored as (alpha_1, log(alpha_2 - alpha_1), ...),
// loadings are unchanged and rho is stored as atanh(rho). The coordinate
// order matches flatten().

#include <Eigen/Core>

#include "ordlatent/model.hpp"

namespace ordlatent {

Eigen::VectorXd to_unconstrained(const ParameterSet& params, const ModelConfig& config);

/// Inverse of to_unconstrained followed by the loading sign convention.
ParameterSet from_unconstrained(const Eigen::VectorXd& theta, const ModelConfig& config);

/// Inverse of to_unconstrained without the sign convention. This is the
/// map the optimizer differentiates through.
ParameterSet decode_unconstrained(const Eigen::VectorXd& theta, const ModelConfig& config);

/// d natural / d theta, k x k.
Eigen::MatrixXd natural_jacobian(const Eigen::VectorXd& theta, const ModelConfig& config);

/// Chain rule: returns J' * natural_gradient without forming J.
Eigen::VectorXd unconstrained_gradient(const Eigen::VectorXd& natural_gradient,
                                       const Eigen::VectorXd& theta, const ModelConfig& config);

}  // namespace ordlatent
