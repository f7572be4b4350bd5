#include "ordlatent/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "ordlatent/error.hpp"
#include "ordlatent/numeric.hpp"
#include "ordlatent/optimize.hpp"
#include "ordlatent/rng.hpp"

namespace ordlatent {

void FitOptions::validate() const {
  if (!(outer_tolerance > 0.0)) throw InvalidArgument("fit: outer_tolerance must be positive");
  if (max_outer_iterations < 1) throw InvalidArgument("fit: max_outer_iterations must be at least 1");
  if (n_starts < 1) throw InvalidArgument("fit: n_starts must be at least 1");
  if (!(bound > 0.0)) throw InvalidArgument("fit: bound must be positive");
  inner.validate();
}

void check_identifiable(const OrdinalDataset& data) {
  for (int l = 0; l < data.config().num_variables(); ++l) {
    if (data.distinct_categories(l) < 2) {
      const bool x = data.config().block_of(l) == Block::x;
      const int index = x ? l + 1 : l - data.config().p_x + 1;
      throw UnidentifiedError(std::string("variable ") + (x ? "X" : "Y") + std::to_string(index) +
                              " is constant; its thresholds and loading are unidentified");
    }
  }
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
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
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> start_thresholds(const OrdinalDataset& data, const std::vector<int>& vars, double loading) {
  const int q = data.config().q;
  std::vector<double> counts(q, 0.5);
  for (int i = 0; i < data.n(); ++i) {
    for (int l : vars) counts[data.at(i, l)] += 1.0;
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  // Marginal logits are attenuated by the latent spread; undo that approximately.
  const double scale = std::sqrt(1.0 + 0.346 * loading * loading);
  std::vector<double> out;
  double cum = 0.0;
  for (int s = 0; s < q - 1; ++s) {
    cum += counts[s];
    out.push_back(scale * logit(cum / total));
  }
  return out;
}

}  // namespace

ParameterSet initial_parameters(const OrdinalDataset& data, int start, std::uint64_t seed) {
  const ModelConfig& config = data.config();
  ParameterSet p;
  std::vector<double> loadings(config.num_variables(), 1.0);
  if (start > 0) {
    for (int l = 0; l < config.num_variables(); ++l) {
      StreamRng rng(stream_key({seed, static_cast<std::uint64_t>(start), static_cast<std::uint64_t>(l)}));
      loadings[l] = 1.0 + 0.5 * rng.normal();
    }
  }
  if (config.shared_thresholds) {
    std::vector<int> all(config.num_variables());
    std::iota(all.begin(), all.end(), 0);
    const double mean_loading = std::accumulate(loadings.begin(), loadings.end(), 0.0) / loadings.size();
    p.thresholds.push_back(start_thresholds(data, all, mean_loading));
  } else {
    for (int l = 0; l < config.num_variables(); ++l) {
      p.thresholds.push_back(start_thresholds(data, {l}, loadings[l]));
    }
  }
  p.loadings_x.assign(loadings.begin(), loadings.begin() + config.p_x);
  p.loadings_y.assign(loadings.begin() + config.p_x, loadings.end());

  std::vector<double> mean_x(data.n(), 0.0);
  std::vector<double> mean_y(data.n(), 0.0);
  for (int i = 0; i < data.n(); ++i) {
    for (int l = 0; l < config.num_variables(); ++l) {
      (l < config.p_x ? mean_x : mean_y)[i] += data.at(i, l);
    }
  }
  p.rho = std::clamp(pearson(average_ranks(mean_x), average_ranks(mean_y)), -0.9, 0.9);
  return p;
}

namespace {

Objective make_objective(LikelihoodSession& session, const ModelConfig& config) {
  return [&session, &config](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    const ParameterSet params = decode_unconstrained(theta, config);
    if ((1.0 - params.rho) * (1.0 + params.rho) < 1e-12) {
      throw NumericalError("latent correlation numerically singular");
    }
    if (grad == nullptr) return session.evaluate(params);
    Eigen::VectorXd natural;
    const double value = session.evaluate(params, &natural);
    *grad = unconstrained_gradient(natural, theta, config);
    return value;
  };
}

bool block_vanishes(const std::vector<double>& loadings) {
  return std::all_of(loadings.begin(), loadings.end(), [](double b) { return std::abs(b) < 1e-4; });
}

}  // namespace

FitResult fit(const OrdinalDataset& data, const FitOptions& opts) {
  opts.validate();
  if (data.n() < 2) throw InvalidArgument("fit: need at least two observations");
  check_identifiable(data);
  const ModelConfig& config = data.config();
  const int k = num_parameters(config);
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(k, -opts.bound);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(k, opts.bound);
  OptimizerOptions oopts;
  oopts.gradient_tolerance = opts.outer_tolerance;
  oopts.max_iterations = opts.max_outer_iterations;

  FitResult out;
  out.config = config;
  std::optional<OptimizerResult> best;
  int total_evaluations = 0;
  for (int s = 0; s < opts.n_starts; ++s) {
    const ParameterSet init =
        (s == 0 && opts.initial) ? *opts.initial : initial_parameters(data, s, opts.seed);
    LikelihoodSession session(data, opts.inner);
    const Objective objective = make_objective(session, config);
    OptimizerResult r;
    try {
      r = maximize_bfgs(objective, to_unconstrained(init, config), lower, upper, oopts);
    } catch (const Error& e) {
      out.starts.push_back({0.0, false, 0, e.what()});
      continue;
    }
    total_evaluations += r.evaluations;
    out.starts.push_back({r.value, r.converged, r.iterations, r.message});
    if (r.converged && (!best || r.value > best->value)) {
      best = std::move(r);
      out.best_start = s;
    }
  }
  out.evaluations = total_evaluations;
  if (!best) {
    std::string why;
    for (std::size_t s = 0; s < out.starts.size(); ++s) {
      why += "\n  start " + std::to_string(s) + ": " + out.starts[s].message;
    }
    throw ConvergenceError("fit: no start converged" + why);
  }
  for (const auto& rec : out.starts) {
    if (rec.converged && std::abs(rec.log_likelihood - best->value) > 1e-6 * std::abs(best->value)) {
      out.multimodal = true;
    }
  }

  out.params = apply_sign_convention(decode_unconstrained(best->x, config));
  out.log_likelihood = best->value;
  out.converged = true;
  out.iterations = best->iterations;
  out.gradient_norm = best->gradient.lpNorm<Eigen::Infinity>();
  out.trace = best->trace;
  out.rho_identified = !block_vanishes(out.params.loadings_x) && !block_vanishes(out.params.loadings_y);

  LikelihoodSession session(data, opts.inner);
  session.evaluate(out.params);
  out.scores = session.scores();

  if (opts.compute_covariance) {
    try {
      const SandwichCovariance cov = sandwich_covariance(data, out.params, opts.inner);
      out.covariance = cov.natural;
      out.covariance_unconstrained = cov.unconstrained;
      out.covariance_status = "ok";
    } catch (const Error& e) {
      out.covariance_status = e.what();
    }
  }
  return out;
}

SandwichCovariance sandwich_covariance(const OrdinalDataset& data, const ParameterSet& params,
                                       const SolverOptions& opts) {
  const ModelConfig& config = data.config();
  const Eigen::VectorXd theta = to_unconstrained(params, config);
  LikelihoodSession session(data, opts);
  const Objective objective = make_objective(session, config);

  SandwichCovariance out;
  out.hessian = finite_difference_hessian(objective, theta);
  const Eigen::MatrixXd information = -out.hessian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(information);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) {
    throw NumericalError("sandwich covariance: Hessian of the log-likelihood is not negative definite");
  }
  out.condition_number = hi / lo;
  if (out.condition_number > 1e12) {
    throw NumericalError("sandwich covariance: Hessian is numerically singular (condition number " +
                         std::to_string(out.condition_number) + ")");
  }
  const Eigen::MatrixXd jac = natural_jacobian(theta, config);
  const Eigen::MatrixXd scores = session.observation_gradients(params) * jac;  // rows: J' g_i
  out.score_outer_product = scores.transpose() * scores;

  const Eigen::MatrixXd inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                              eig.eigenvectors().transpose();
  out.unconstrained = inv * out.score_outer_product * inv;
  out.unconstrained = 0.5 * (out.unconstrained + out.unconstrained.transpose()).eval();
  out.natural = jac * out.unconstrained * jac.transpose();
  out.natural = 0.5 * (out.natural + out.natural.transpose()).eval();
  out.model_based = jac * inv * jac.transpose();
  out.model_based = 0.5 * (out.model_based + out.model_based.transpose()).eval();
  return out;
}

}  // namespace ordlatent
