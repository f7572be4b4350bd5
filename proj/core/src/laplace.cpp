#include "ordlatent/laplace.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "ordlatent/error.hpp"
#include "ordlatent/parameterization.hpp"

namespace ordlatent {

void SolverOptions::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("solver: tolerance must be positive");
  if (max_iterations < 1) throw InvalidArgument("solver: max_iterations must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("solver: damping must lie in (0, 1]");
}

Eigen::Matrix2d latent_correlation(double rho) {
  Eigen::Matrix2d r;
  r << 1.0, rho, rho, 1.0;
  return r;
}

Eigen::Matrix2d latent_precision(double rho) {
  const double det = (1.0 - rho) * (1.0 + rho);
  Eigen::Matrix2d p;
  p << 1.0, -rho, -rho, 1.0;
  return p / det;
}

namespace {

Eigen::Vector2d as_vector(LatentPoint f) { return {f.f_x, f.f_y}; }
LatentPoint as_point(const Eigen::Vector2d& v) { return {v[0], v[1]}; }

// Per-record sums needed by the inner solver.
struct RecordSums {
  double log_density = 0.0;
  Eigen::Vector2d score = Eigen::Vector2d::Zero();   // sum beta * d log P / d shift
  Eigen::Vector2d weight = Eigen::Vector2d::Zero();  // sum beta^2 * w
};

RecordSums record_sums(const ModelConfig& config, const ParameterSet& params, std::span<const int> record,
                       const Eigen::Vector2d& f) {
  RecordSums s;
  for (int l = 0; l < config.num_variables(); ++l) {
    const int b = static_cast<int>(config.block_of(l));
    const double beta = params.loading(l, config);
    const CategoryTerms t = category_terms(params.thresholds_of(l, config), record[l], beta * f[b]);
    s.log_density += t.log_prob;
    s.score[b] += beta * t.score;
    s.weight[b] += beta * beta * t.weight();
  }
  return s;
}

void check_record(const ModelConfig& config, std::span<const int> record) {
  if (static_cast<int>(record.size()) != config.num_variables()) {
    throw InvalidArgument("record length does not match the model");
  }
  for (int c : record) {
    if (c < 0 || c >= config.q) throw InvalidArgument("category index out of range");
  }
}

struct Evaluation {
  Eigen::Vector2d f;
  RecordSums sums;
  double h = 0.0;
  Eigen::Vector2d grad;
  Eigen::Vector2d fixed_point;  // R score - F, the fixed-point residual
  double residual = 0.0;
};

// F' R^{-1} F and R^{-1} F in sum/difference coordinates, which stay
// accurate as |rho| approaches 1.
double precision_form(double rho, const Eigen::Vector2d& f, Eigen::Vector2d& prec_f) {
  const double a = 0.5 * (f[0] + f[1]) / (1.0 + rho);
  const double d = 0.5 * (f[0] - f[1]) / (1.0 - rho);
  prec_f = {a + d, a - d};
  return (f[0] + f[1]) * a + (f[0] - f[1]) * d;
}

Evaluation evaluate_at(const ModelConfig& config, const ParameterSet& params, std::span<const int> record,
                       const Eigen::Matrix2d& r, const Eigen::Vector2d& f) {
  Evaluation e;
  e.f = f;
  e.sums = record_sums(config, params, record, f);
  Eigen::Vector2d prec_f;
  e.h = e.sums.log_density - 0.5 * precision_form(params.rho, f, prec_f);
  e.grad = e.sums.score - prec_f;
  e.fixed_point = r * e.sums.score - f;
  e.residual = e.fixed_point.norm();
  if (!std::isfinite(e.h) || !e.grad.allFinite()) {
    throw NumericalError("latent score solve produced non-finite values");
  }
  return e;
}

// Gamma^{-1} grad h, solved as (I + R W) step = R score - F.
Eigen::Vector2d newton_step(const Evaluation& e, const Eigen::Matrix2d& r) {
  Eigen::Matrix2d m = r * e.sums.weight.asDiagonal();
  m.diagonal().array() += 1.0;
  return m.partialPivLu().solve(e.fixed_point);
}

}  // namespace

namespace {

std::string format_residual(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

double joint_log_exponent(const ModelConfig& config, const ParameterSet& params, std::span<const int> record,
                          LatentPoint f) {
  params.validate(config);
  check_record(config, record);
  const Eigen::Vector2d v = as_vector(f);
  return record_sums(config, params, record, v).log_density - 0.5 * v.dot(latent_precision(params.rho) * v);
}

Eigen::Vector2d joint_log_exponent_gradient(const ModelConfig& config, const ParameterSet& params,
                                            std::span<const int> record, LatentPoint f) {
  params.validate(config);
  check_record(config, record);
  const Eigen::Vector2d v = as_vector(f);
  return record_sums(config, params, record, v).score - latent_precision(params.rho) * v;
}

LatentPoint latent_score_map(const ModelConfig& config, const ParameterSet& params, std::span<const int> record,
                             LatentPoint f) {
  params.validate(config);
  check_record(config, record);
  return as_point(latent_correlation(params.rho) * record_sums(config, params, record, as_vector(f)).score);
}

LatentSolution solve_latent_scores(const ModelConfig& config, const ParameterSet& params,
                                   std::span<const int> record, const SolverOptions& opts, LatentPoint start) {
  opts.validate();
  params.validate(config);
  check_record(config, record);
  const Eigen::Matrix2d r = latent_correlation(params.rho);
  const Eigen::Matrix2d r_inv = latent_precision(params.rho);

  Evaluation cur = evaluate_at(config, params, record, r, as_vector(start));
  bool newton = false;
  int it = 0;
  for (; it < opts.max_iterations && cur.residual > opts.tolerance; ++it) {
    if (!newton) {
      const Eigen::Vector2d next = cur.f + opts.damping * cur.fixed_point;
      Evaluation trial = evaluate_at(config, params, record, r, next);
      if (trial.residual > 0.5 * cur.residual) {
        newton = true;
        if (trial.residual >= cur.residual) continue;
      }
      cur = std::move(trial);
      continue;
    }
    // Safeguarded Newton: h is concave, so backtrack until the Armijo condition holds.
    const Eigen::Vector2d step = newton_step(cur, r);
    const double slope = cur.grad.dot(step);
    // Near the peak h is flat to rounding, so a falling residual also counts.
    const double flat = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(cur.h));
    auto acceptable = [&](const Evaluation& e, double t) {
      return e.h >= cur.h + 1e-4 * t * slope || (e.h >= cur.h - flat && e.residual < cur.residual);
    };
    double t = 1.0;
    Evaluation trial = evaluate_at(config, params, record, r, cur.f + step);
    while (!acceptable(trial, t) && t > 1e-12) {
      t *= 0.5;
      trial = evaluate_at(config, params, record, r, cur.f + t * step);
    }
    if (!acceptable(trial, t)) break;  // no further progress possible
    cur = std::move(trial);
  }

  // One full Newton polish; quadratic convergence takes the residual to rounding level.
  if (cur.residual <= opts.tolerance) {
    Evaluation polished = evaluate_at(config, params, record, r, cur.f + newton_step(cur, r));
    if (polished.residual < cur.residual) cur = std::move(polished);
  }

  LatentSolution sol;
  sol.f_hat = as_point(cur.f);
  sol.gamma = r_inv;
  sol.gamma.diagonal() += cur.sums.weight;
  sol.iterations = it;
  sol.residual_norm = cur.residual;
  sol.converged = cur.residual <= opts.tolerance;
  return sol;
}

Eigen::Matrix2d correction_matrix(const ModelConfig& config, const ParameterSet& params,
                                  std::span<const int> record, LatentPoint f_hat) {
  params.validate(config);
  check_record(config, record);
  Eigen::Matrix2d gamma = latent_precision(params.rho);
  gamma.diagonal() += record_sums(config, params, record, as_vector(f_hat)).weight;
  if (!(gamma(0, 0) > 0.0) || !(gamma(0, 0) * gamma(1, 1) - gamma(0, 1) * gamma(1, 0) > 0.0)) {
    throw NumericalError("correction matrix is not positive definite");
  }
  return gamma;
}

double log_det_spd2(const Eigen::Matrix2d& m) {
  // det = m00 m11 (1 - c^2) with c^2 = m01^2 / (m00 m11) in [0, 1)
  const double diag = m(0, 0) * m(1, 1);
  const double c2 = m(0, 1) * m(1, 0) / diag;
  if (!(m(0, 0) > 0.0) || !(m(1, 1) > 0.0) || !(c2 < 1.0)) {
    throw NumericalError("matrix is not positive definite");
  }
  return std::log(m(0, 0)) + std::log(m(1, 1)) + std::log1p(-c2);
}

double laplace_log_integral(double peak_value, const Eigen::MatrixXd& neg_hessian, double t) {
  const auto m = static_cast<double>(neg_hessian.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Laplace approximation needs a positive-definite negative Hessian");
  }
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * log_det - 0.5 * m * std::log(t) + t * peak_value;
}

double observation_log_likelihood(const ModelConfig& config, const ParameterSet& params,
                                  std::span<const int> record, const LatentSolution& solution,
                                  Eigen::VectorXd* natural_gradient) {
  const double rho = params.rho;
  const double one_minus_rho2 = (1.0 - rho) * (1.0 + rho);
  const Eigen::Matrix2d r_inv = latent_precision(rho);
  const Eigen::Vector2d f = as_vector(solution.f_hat);
  const int p = config.num_variables();

  double log_density = 0.0;
  Eigen::Vector2d weight = Eigen::Vector2d::Zero();
  Eigen::Vector2d weight_slope = Eigen::Vector2d::Zero();  // d weight_b / d f_b
  thread_local std::vector<CategoryTerms> terms;
  terms.resize(static_cast<std::size_t>(p));
  for (int l = 0; l < p; ++l) {
    const int b = static_cast<int>(config.block_of(l));
    const double beta = params.loading(l, config);
    terms[l] = category_terms(params.thresholds_of(l, config), record[l], beta * f[b]);
    log_density += terms[l].log_prob;
    weight[b] += beta * beta * terms[l].weight();
    weight_slope[b] += beta * beta * beta * terms[l].weight_slope();
  }
  Eigen::Matrix2d gamma = r_inv;
  gamma.diagonal() += weight;
  const double log_det_gamma = log_det_spd2(gamma);
  const double value =
      log_density - 0.5 * f.dot(r_inv * f) - 0.5 * log_det_gamma - 0.5 * std::log(one_minus_rho2);

  if (natural_gradient == nullptr) {
    return value;
  }
  Eigen::VectorXd& grad = *natural_gradient;
  const Eigen::Matrix2d gamma_inv = gamma.inverse();

  // A parameter that enters only block b's score (by m_b) and curvature
  // (by dw_b) moves F_hat by Gamma^{-1} e_b m_b.
  auto accumulate = [&](int index, double dh, int b, double m_b, double dw_b) {
    const Eigen::Vector2d df = gamma_inv.col(b) * m_b;
    double d_log_det = gamma_inv(b, b) * dw_b;
    d_log_det += gamma_inv(0, 0) * weight_slope[0] * df[0] + gamma_inv(1, 1) * weight_slope[1] * df[1];
    grad[index] += dh - 0.5 * d_log_det;
  };

  for (int l = 0; l < p; ++l) {
    const CategoryTerms& t = terms[l];
    const int b = static_cast<int>(config.block_of(l));
    const double beta = params.loading(l, config);
    const int c = record[l];
    if (t.has_upper) {
      accumulate(threshold_index(l, c, config), t.d_upper, b, -beta * t.v_upper, beta * beta * t.k_upper);
    }
    if (t.has_lower) {
      accumulate(threshold_index(l, c - 1, config), t.d_lower, b, -beta * t.v_lower, beta * beta * t.k_lower);
    }
    accumulate(loading_index(l, config), t.score * f[b], b, t.score - beta * f[b] * t.weight(),
               2.0 * beta * t.weight() + beta * beta * t.weight_slope() * f[b]);
  }

  // rho enters through R^{-1} only.
  Eigen::Matrix2d d_r_inv;
  d_r_inv << 2.0 * rho, -(1.0 + rho * rho), -(1.0 + rho * rho), 2.0 * rho;
  d_r_inv /= one_minus_rho2 * one_minus_rho2;
  const Eigen::Vector2d df = gamma_inv * (-(d_r_inv * f));
  double d_log_det = (gamma_inv * d_r_inv).trace();
  d_log_det += gamma_inv(0, 0) * weight_slope[0] * df[0] + gamma_inv(1, 1) * weight_slope[1] * df[1];
  const double d_log_det_r = -2.0 * rho / one_minus_rho2;
  grad[rho_index(config)] += -0.5 * f.dot(d_r_inv * f) - 0.5 * d_log_det - 0.5 * d_log_det_r;
  return value;
}

namespace {

LatentSolution checked_solve(const OrdinalDataset& data, const ParameterSet& params, const SolverOptions& opts,
                             int i, LatentPoint start) {
  LatentSolution sol;
  try {
    sol = solve_latent_scores(data.config(), params, data.row(i), opts, start);
  } catch (const NumericalError& e) {
    throw InnerSolveError(i, e.what());
  }
  if (!sol.converged) {
    throw InnerSolveError(i, "latent score solve did not converge (residual " + format_residual(sol.residual_norm) + ")");
  }
  return sol;
}

}  // namespace

double approx_log_likelihood(const OrdinalDataset& data, const ParameterSet& params, const SolverOptions& opts) {
  LikelihoodSession session(data, opts);
  return session.evaluate(params);
}

Eigen::VectorXd approx_log_likelihood_natural_gradient(const OrdinalDataset& data, const ParameterSet& params,
                                                       const SolverOptions& opts) {
  LikelihoodSession session(data, opts);
  Eigen::VectorXd grad;
  session.evaluate(params, &grad);
  return grad;
}

Eigen::VectorXd approx_log_likelihood_gradient(const OrdinalDataset& data, const ParameterSet& params,
                                               const SolverOptions& opts) {
  const ModelConfig& config = data.config();
  const Eigen::VectorXd theta = to_unconstrained(params, config);
#ifdef ORDLATENT_FD_GRADIENT
  constexpr double step = 1e-5;
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    Eigen::VectorXd up = theta;
    Eigen::VectorXd down = theta;
    up[j] += step;
    down[j] -= step;
    grad[j] = (approx_log_likelihood(data, decode_unconstrained(up, config), opts) -
               approx_log_likelihood(data, decode_unconstrained(down, config), opts)) /
              (2.0 * step);
  }
  return grad;
#else
  return unconstrained_gradient(approx_log_likelihood_natural_gradient(data, params, opts), theta, config);
#endif
}

LikelihoodSession::LikelihoodSession(const OrdinalDataset& data, SolverOptions opts)
    : data_(&data), opts_(opts), warm_(static_cast<std::size_t>(data.n())) {
  opts_.validate();
}

void LikelihoodSession::reset() {
  have_warm_ = false;
  std::fill(warm_.begin(), warm_.end(), LatentPoint{});
}

LatentSolution LikelihoodSession::solve(int i, const ParameterSet& params) {
  if (have_warm_) {
    try {
      return checked_solve(*data_, params, opts_, i, warm_[i]);
    } catch (const InnerSolveError&) {
      // fall through to a cold start
    }
  }
  return checked_solve(*data_, params, opts_, i, LatentPoint{});
}

double LikelihoodSession::evaluate(const ParameterSet& params, Eigen::VectorXd* natural_gradient) {
  const ModelConfig& config = data_->config();
  params.validate(config);
  ++evaluations_;
  if (natural_gradient != nullptr) {
    *natural_gradient = Eigen::VectorXd::Zero(num_parameters(config));
  }
  std::vector<LatentPoint> next(warm_.size());
  double total = 0.0;
  for (int i = 0; i < data_->n(); ++i) {
    const LatentSolution sol = solve(i, params);
    next[i] = sol.f_hat;
    total += observation_log_likelihood(config, params, data_->row(i), sol, natural_gradient);
  }
  if (!std::isfinite(total)) {
    throw NumericalError("approximate log-likelihood is not finite");
  }
  warm_ = std::move(next);
  have_warm_ = true;
  return total;
}

Eigen::MatrixXd LikelihoodSession::observation_gradients(const ParameterSet& params) {
  const ModelConfig& config = data_->config();
  params.validate(config);
  Eigen::MatrixXd out(data_->n(), num_parameters(config));
  Eigen::VectorXd g(num_parameters(config));
  for (int i = 0; i < data_->n(); ++i) {
    const LatentSolution sol = solve(i, params);
    g.setZero();
    observation_log_likelihood(config, params, data_->row(i), sol, &g);
    out.row(i) = g.transpose();
  }
  return out;
}

}  // namespace ordlatent
