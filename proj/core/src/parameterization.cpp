#include "ordlatent/parameterization.hpp"

#include <cmath>

#include "ordlatent/error.hpp"

namespace ordlatent {

Eigen::VectorXd to_unconstrained(const ParameterSet& params, const ModelConfig& config) {
  params.validate(config);
  const std::vector<double> natural = flatten(params);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(natural.size()));
  const int cut = config.num_cutpoints();
  for (int set = 0; set < config.num_threshold_sets(); ++set) {
    const auto& seq = params.thresholds[set];
    theta[set * cut] = seq[0];
    for (int s = 1; s < cut; ++s) theta[set * cut + s] = std::log(seq[s] - seq[s - 1]);
  }
  for (int l = 0; l < config.num_variables(); ++l) {
    theta[loading_index(l, config)] = params.loading(l, config);
  }
  theta[rho_index(config)] = std::atanh(params.rho);
  return theta;
}

ParameterSet decode_unconstrained(const Eigen::VectorXd& theta, const ModelConfig& config) {
  if (theta.size() != num_parameters(config)) {
    throw InvalidArgument("unconstrained vector has the wrong length");
  }
  if (!theta.allFinite()) {
    throw InvalidArgument("unconstrained vector has non-finite entries");
  }
  std::vector<double> natural(theta.data(), theta.data() + theta.size());
  const int cut = config.num_cutpoints();
  for (int set = 0; set < config.num_threshold_sets(); ++set) {
    for (int s = 1; s < cut; ++s) {
      natural[set * cut + s] = natural[set * cut + s - 1] + std::exp(theta[set * cut + s]);
    }
  }
  natural[rho_index(config)] = std::tanh(theta[rho_index(config)]);
  return unflatten(natural, config);
}

ParameterSet from_unconstrained(const Eigen::VectorXd& theta, const ModelConfig& config) {
  return apply_sign_convention(decode_unconstrained(theta, config));
}

Eigen::MatrixXd natural_jacobian(const Eigen::VectorXd& theta, const ModelConfig& config) {
  const int k = num_parameters(config);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(k, k);
  const int cut = config.num_cutpoints();
  for (int set = 0; set < config.num_threshold_sets(); ++set) {
    for (int s = 0; s < cut; ++s) {
      jac(set * cut + s, set * cut) = 1.0;
      for (int j = 1; j <= s; ++j) jac(set * cut + s, set * cut + j) = std::exp(theta[set * cut + j]);
    }
  }
  const double r = std::tanh(theta[rho_index(config)]);
  jac(rho_index(config), rho_index(config)) = 1.0 - r * r;
  return jac;
}

Eigen::VectorXd unconstrained_gradient(const Eigen::VectorXd& natural_gradient,
                                       const Eigen::VectorXd& theta, const ModelConfig& config) {
  Eigen::VectorXd g = natural_gradient;
  const int cut = config.num_cutpoints();
  for (int set = 0; set < config.num_threshold_sets(); ++set) {
    // d alpha_s / d theta_j = exp(theta_j) for 1 <= j <= s
    double tail = 0.0;
    for (int s = cut - 1; s >= 1; --s) {
      tail += natural_gradient[set * cut + s];
      g[set * cut + s] = std::exp(theta[set * cut + s]) * tail;
    }
    g[set * cut] = tail + natural_gradient[set * cut];
  }
  const double r = std::tanh(theta[rho_index(config)]);
  g[rho_index(config)] *= 1.0 - r * r;
  return g;
}

}  // namespace ordlatent
