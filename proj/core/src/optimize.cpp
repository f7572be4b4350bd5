#include "ordlatent/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ordlatent/error.hpp"

namespace ordlatent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Point {
  Eigen::VectorXd x;
  double value = kNegInf;
  Eigen::VectorXd grad;
};

class Counted {
 public:
  explicit Counted(const Objective& f) : f_(f) {}

  Point eval(const Eigen::VectorXd& x) {
    ++count;
    Point p{x, kNegInf, Eigen::VectorXd::Zero(x.size())};
    try {
      p.value = f_(x, &p.grad);
    } catch (const Error&) {
      p.value = kNegInf;
    }
    if (!std::isfinite(p.value) || !p.grad.allFinite()) p.value = kNegInf;
    return p;
  }

  int count = 0;

 private:
  const Objective& f_;
};

double max_feasible_step(const Eigen::VectorXd& x, const Eigen::VectorXd& d, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (d[i] > 0.0) alpha = std::min(alpha, (upper[i] - x[i]) / d[i]);
    if (d[i] < 0.0) alpha = std::min(alpha, (lower[i] - x[i]) / d[i]);
  }
  return std::max(alpha, 0.0);
}

// Zero the components of an ascent direction that would leave the box.
Eigen::VectorXd project_direction(Eigen::VectorXd d, const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] >= upper[i] && d[i] > 0.0) || (x[i] <= lower[i] && d[i] < 0.0)) d[i] = 0.0;
  }
  return d;
}

bool touches_bound(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double tol = 1e-8 * (1.0 + std::abs(x[i]));
    if (x[i] <= lower[i] + tol || x[i] >= upper[i] - tol) return true;
  }
  return false;
}

}  // namespace

Eigen::MatrixXd finite_difference_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index k = x.size();
  Eigen::MatrixXd h(k, k);
  Eigen::VectorXd g_up(k);
  Eigen::VectorXd g_down(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double step = rel_step * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[j] += step;
    down[j] -= step;
    f(up, &g_up);
    f(down, &g_down);
    h.col(j) = (g_up - g_down) / (2.0 * step);
  }
  if (!h.allFinite()) throw NumericalError("finite-difference Hessian is not finite");
  return 0.5 * (h + h.transpose());
}

OptimizerResult maximize_bfgs(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper, const OptimizerOptions& opts) {
  const Eigen::Index k = x0.size();
  x0 = x0.cwiseMax(lower).cwiseMin(upper);
  Counted objective(f);
  OptimizerResult result;

  Point cur = objective.eval(x0);
  if (!std::isfinite(cur.value)) {
    result.x = x0;
    result.value = cur.value;
    result.gradient = cur.grad;
    result.evaluations = objective.count;
    result.message = "objective is not finite at the starting point";
    return result;
  }
  result.trace.push_back(cur.value);

  auto projected_norm = [&](const Point& p) {
    return project_direction(p.grad, p.x, lower, upper).lpNorm<Eigen::Infinity>();
  };

  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(k, k);
  bool fresh = true;
  bool stalled = false;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (projected_norm(cur) <= opts.gradient_tolerance) break;
    Eigen::VectorXd d = project_direction(inv_h * cur.grad, cur.x, lower, upper);
    double slope = cur.grad.dot(d);
    if (!(slope > 0.0)) {
      inv_h.setIdentity();
      fresh = true;
      d = project_direction(cur.grad, cur.x, lower, upper);
      slope = cur.grad.dot(d);
    }
    double alpha = std::min({1.0, max_feasible_step(cur.x, d, lower, upper),
                             opts.max_step / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300)});
    Point trial;
    bool accepted = false;
    while (alpha > 1e-16) {
      Eigen::VectorXd x = (cur.x + alpha * d).cwiseMax(lower).cwiseMin(upper);
      trial = objective.eval(x);
      if (trial.value >= cur.value + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        inv_h.setIdentity();
        fresh = true;
        continue;
      }
      stalled = true;
      break;
    }
    const Eigen::VectorXd s = trial.x - cur.x;
    const Eigen::VectorXd y = cur.grad - trial.grad;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) {
        inv_h *= sy / y.squaredNorm();
        fresh = false;
      }
      const double r = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(k, k) - r * s * y.transpose();
      inv_h = left * inv_h * left.transpose() + r * s * s.transpose();
    }
    cur = std::move(trial);
    result.trace.push_back(cur.value);
  }

  if (opts.newton_polish && projected_norm(cur) > opts.gradient_tolerance && (stalled || it == opts.max_iterations)) {
    // Near the optimum function differences drown in rounding; Newton steps
    // driven by the gradient alone still make progress.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(cur.value));
    for (int step = 0; step < opts.max_polish_steps && projected_norm(cur) > opts.gradient_tolerance; ++step) {
      Eigen::MatrixXd hess;
      try {
        hess = finite_difference_hessian(f, cur.x);
      } catch (const Error&) {
        break;
      }
      objective.count += 2 * static_cast<int>(k);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
      if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) break;
      const Eigen::VectorXd x = (cur.x + ldlt.solve(cur.grad)).cwiseMax(lower).cwiseMin(upper);
      Point trial = objective.eval(x);
      if (!(trial.value >= cur.value - slack) || !(projected_norm(trial) < projected_norm(cur))) break;
      cur = std::move(trial);
      result.trace.push_back(cur.value);
    }
  }

  result.x = cur.x;
  result.value = cur.value;
  result.gradient = cur.grad;
  result.iterations = it;
  result.evaluations = objective.count;
  result.at_bound = touches_bound(cur.x, lower, upper);
  result.converged = projected_norm(cur) <= opts.gradient_tolerance && !result.at_bound;
  if (result.at_bound) {
    result.message = "solution lies on the parameter box";
  } else if (!result.converged) {
    result.message = stalled ? "line search stalled above the gradient tolerance" : "iteration limit reached";
  }
  return result;
}

}  // namespace ordlatent
