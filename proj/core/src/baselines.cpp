#include "ordlatent/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "ordlatent/error.hpp"
#include "ordlatent/numeric.hpp"
#include "ordlatent/optimize.hpp"

namespace ordlatent {

ContingencyTable::ContingencyTable(int rows, int cols, std::vector<std::int64_t> counts)
    : rows_(rows), cols_(cols), counts_(std::move(counts)) {
  if (rows < 1 || cols < 1) throw InvalidArgument("contingency table: empty shape");
  if (counts_.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("contingency table: expected " + std::to_string(rows * cols) + " counts, got " +
                          std::to_string(counts_.size()));
  }
  for (std::int64_t c : counts_) {
    if (c < 0) throw InvalidArgument("contingency table: negative count");
    total_ += c;
  }
  if (total_ < 1) throw InvalidArgument("contingency table: total count is zero");
}

ContingencyTable ContingencyTable::cross_tab(const OrdinalDataset& data, int var_x, int var_y) {
  const int p = data.config().num_variables();
  if (var_x < 0 || var_x >= p || var_y < 0 || var_y >= p) throw InvalidArgument("cross_tab: variable out of range");
  const int q = data.config().q;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(q) * q, 0);
  for (int i = 0; i < data.n(); ++i) ++counts[static_cast<std::size_t>(data.at(i, var_x)) * q + data.at(i, var_y)];
  return ContingencyTable(q, q, std::move(counts));
}

std::vector<std::int64_t> ContingencyTable::row_totals() const {
  std::vector<std::int64_t> out(rows_, 0);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[i] += at(i, j);
  }
  return out;
}

std::vector<std::int64_t> ContingencyTable::col_totals() const {
  std::vector<std::int64_t> out(cols_, 0);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[j] += at(i, j);
  }
  return out;
}

ContingencyTable ContingencyTable::transposed() const {
  std::vector<std::int64_t> t(counts_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t[static_cast<std::size_t>(j) * rows_ + i] = at(i, j);
  }
  return ContingencyTable(cols_, rows_, std::move(t));
}

ContingencyTable ContingencyTable::scaled(std::int64_t factor) const {
  if (factor < 1) throw InvalidArgument("contingency table: scale factor must be positive");
  std::vector<std::int64_t> t(counts_);
  for (auto& c : t) c *= factor;
  return ContingencyTable(rows_, cols_, std::move(t));
}

ContingencyTable ContingencyTable::without_empty_margins() const {
  const auto rt = row_totals();
  const auto ct = col_totals();
  std::vector<int> keep_r;
  std::vector<int> keep_c;
  for (int i = 0; i < rows_; ++i) {
    if (rt[i] > 0) keep_r.push_back(i);
  }
  for (int j = 0; j < cols_; ++j) {
    if (ct[j] > 0) keep_c.push_back(j);
  }
  std::vector<std::int64_t> t;
  for (int i : keep_r) {
    for (int j : keep_c) t.push_back(at(i, j));
  }
  return ContingencyTable(static_cast<int>(keep_r.size()), static_cast<int>(keep_c.size()), std::move(t));
}

namespace {

template <int N>
double bvnu_sum(double h, double k, double r) {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double hk = h * k;
  const double hs = 0.5 * (h * h + k * k);
  const double asr = std::asin(r);
  double bvn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      const double sn = std::sin(0.5 * asr * (1.0 + sgn * x[i]));
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
  }
  return bvn * asr / (4.0 * std::numbers::pi);
}

template <int N>
double bvnu_tail(double h, double k, double r, double hk) {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  double bvn = 0.0;
  const double as = (1.0 - r) * (1.0 + r);
  double a = std::sqrt(as);
  const double bs = (h - k) * (h - k);
  const double c = (4.0 - hk) / 8.0;
  const double d = (12.0 - hk) / 16.0;
  double asr = -0.5 * (bs / as + hk);
  if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
  if (-hk < 100.0) {
    const double b = std::sqrt(bs);
    bvn -= std::exp(-0.5 * hk) * std::sqrt(2.0 * std::numbers::pi) * normal_cdf(-b / a) * b *
           (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
  }
  a *= 0.5;
  // Remainder by Gauss-Legendre on [0, a].
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      const double xs = std::pow(a * (sgn * x[i] + 1.0), 2);
      const double rs = std::sqrt(1.0 - xs);
      asr = -0.5 * (bs / xs + hk);
      if (asr > -100.0) {
        bvn += a * w[i] * std::exp(asr) *
               (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
  }
  return -bvn / (2.0 * std::numbers::pi);
}

// P(X > h, Y > k), finite h and k.
double bvnu(double h, double k, double r) {
  const double ar = std::abs(r);
  if (ar < 0.925) {
    const double tail = normal_cdf(-h) * normal_cdf(-k);
    if (ar < 0.3) return tail + bvnu_sum<6>(h, k, r);
    if (ar < 0.75) return tail + bvnu_sum<12>(h, k, r);
    return tail + bvnu_sum<20>(h, k, r);
  }
  double kk = k;
  double hk = h * k;
  if (r < 0.0) {
    kk = -k;
    hk = -hk;
  }
  double bvn = bvnu_tail<20>(h, kk, r < 0.0 ? -r : r, hk);
  if (r > 0.0) return bvn + normal_cdf(-std::max(h, kk));
  bvn = -bvn;
  if (h < kk) {
    const double between = h < 0.0 ? normal_cdf(kk) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-kk);
    bvn += between;
  }
  return bvn;
}

}  // namespace

double bivariate_normal_cdf(double h, double k, double rho) {
  if (!(std::abs(rho) <= 1.0 - 1e-12)) throw InvalidArgument("bivariate normal: |rho| must not exceed 1 - 1e-12");
  if (std::isnan(h) || std::isnan(k)) throw InvalidArgument("bivariate normal: NaN limit");
  if (h == -std::numeric_limits<double>::infinity() || k == -std::numeric_limits<double>::infinity()) return 0.0;
  if (h == std::numeric_limits<double>::infinity()) return normal_cdf(k);
  if (k == std::numeric_limits<double>::infinity()) return normal_cdf(h);
  return std::clamp(bvnu(-h, -k, rho), 0.0, 1.0);
}

double bivariate_normal_rect(double lower_x, double lower_y, double upper_x, double upper_y, double rho) {
  if (!(lower_x < upper_x && lower_y < upper_y)) throw InvalidArgument("bivariate normal: empty rectangle");
  const double p = bivariate_normal_cdf(upper_x, upper_y, rho) - bivariate_normal_cdf(lower_x, upper_y, rho) -
                   bivariate_normal_cdf(upper_x, lower_y, rho) + bivariate_normal_cdf(lower_x, lower_y, rho);
  return std::max(p, 0.0);
}

std::vector<double> marginal_thresholds(const std::vector<std::int64_t>& totals) {
  const double n = static_cast<double>(std::accumulate(totals.begin(), totals.end(), std::int64_t{0}));
  std::vector<double> out;
  double cum = 0.0;
  for (std::size_t s = 0; s + 1 < totals.size(); ++s) {
    cum += static_cast<double>(totals[s]);
    out.push_back(normal_quantile(cum / n));
  }
  return out;
}

double polychoric_log_likelihood(const ContingencyTable& table, const std::vector<double>& thresholds_x,
                                 const std::vector<double>& thresholds_y, double rho) {
  if (thresholds_x.size() + 1 != static_cast<std::size_t>(table.rows()) ||
      thresholds_y.size() + 1 != static_cast<std::size_t>(table.cols())) {
    throw InvalidArgument("polychoric: threshold counts do not match the table");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto cut = [&](const std::vector<double>& t, int s) {
    if (s < 0) return -inf;
    if (s >= static_cast<int>(t.size())) return inf;
    return t[s];
  };
  double ll = 0.0;
  for (int i = 0; i < table.rows(); ++i) {
    for (int j = 0; j < table.cols(); ++j) {
      if (table.at(i, j) == 0) continue;
      const double p = bivariate_normal_rect(cut(thresholds_x, i - 1), cut(thresholds_y, j - 1), cut(thresholds_x, i),
                                             cut(thresholds_y, j), rho);
      ll += static_cast<double>(table.at(i, j)) * std::log(std::max(p, 1e-300));
    }
  }
  return ll;
}

namespace {

void encode_cuts(const std::vector<double>& t, Eigen::VectorXd& theta, int& pos) {
  theta[pos++] = t[0];
  for (std::size_t s = 1; s < t.size(); ++s) theta[pos++] = std::log(std::max(t[s] - t[s - 1], 1e-8));
}

std::vector<double> decode_cuts(const Eigen::VectorXd& theta, int& pos, int count) {
  std::vector<double> t(count);
  t[0] = theta[pos++];
  for (int s = 1; s < count; ++s) t[s] = t[s - 1] + std::exp(theta[pos++]);
  return t;
}

}  // namespace

PolychoricResult polychoric(const ContingencyTable& input) {
  const ContingencyTable table = input.without_empty_margins();
  if (table.rows() < 2 || table.cols() < 2) {
    throw UnidentifiedError("polychoric: need at least two nonempty rows and columns");
  }
  PolychoricResult out;
  const auto tx = marginal_thresholds(table.row_totals());
  const auto ty = marginal_thresholds(table.col_totals());

  const auto profile = [&](double rho) { return -polychoric_log_likelihood(table, tx, ty, rho); };
  const auto [rho2, negll2] = boost::math::tools::brent_find_minima(profile, -kPolychoricBoundary,
                                                                    kPolychoricBoundary, 40);
  out.two_step_rho = rho2;
  out.two_step_log_likelihood = -negll2;

  const int nx = table.rows() - 1;
  const int ny = table.cols() - 1;
  const int k = nx + ny + 1;
  auto decode = [&](const Eigen::VectorXd& theta, std::vector<double>& ax, std::vector<double>& ay) {
    int pos = 0;
    ax = decode_cuts(theta, pos, nx);
    ay = decode_cuts(theta, pos, ny);
    return kPolychoricBoundary * std::tanh(theta[pos]);
  };
  const Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    std::vector<double> ax;
    std::vector<double> ay;
    const double value = polychoric_log_likelihood(table, ax, ay, decode(theta, ax, ay));
    if (grad != nullptr) {
      grad->resize(k);
      for (int j = 0; j < k; ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(theta[j]));
        Eigen::VectorXd up = theta;
        Eigen::VectorXd dn = theta;
        up[j] += step;
        dn[j] -= step;
        std::vector<double> bx;
        std::vector<double> by;
        const double fu = polychoric_log_likelihood(table, bx, by, decode(up, bx, by));
        const double fd = polychoric_log_likelihood(table, bx, by, decode(dn, bx, by));
        (*grad)[j] = (fu - fd) / (2.0 * step);
      }
    }
    return value;
  };

  Eigen::VectorXd theta0(k);
  int pos = 0;
  encode_cuts(tx, theta0, pos);
  encode_cuts(ty, theta0, pos);
  theta0[pos] = std::atanh(std::clamp(rho2 / kPolychoricBoundary, -0.999999, 0.999999));

  OptimizerOptions opts;
  opts.gradient_tolerance = 1e-6 * std::max(1.0, std::sqrt(static_cast<double>(table.total())));
  const double bound = 25.0;
  const OptimizerResult r = maximize_bfgs(objective, theta0, Eigen::VectorXd::Constant(k, -bound),
                                          Eigen::VectorXd::Constant(k, bound), opts);
  out.rho = decode(r.x, out.thresholds_x, out.thresholds_y);
  out.log_likelihood = r.value;
  out.boundary = std::abs(out.rho) >= kPolychoricBoundary - 1e-6;
  if (out.boundary) {
    out.rho = std::copysign(kPolychoricBoundary, out.rho);
  } else if (!r.converged) {
    throw ConvergenceError("polychoric: joint maximization did not converge (" + r.message + ")");
  }
  return out;
}

std::vector<PairwisePolychoric> pairwise_polychoric(const OrdinalDataset& data) {
  const ModelConfig& c = data.config();
  std::vector<PairwisePolychoric> out;
  for (int a = 0; a < c.p_x; ++a) {
    for (int b = 0; b < c.p_y; ++b) {
      PairwisePolychoric pair;
      pair.var_x = a;
      pair.var_y = b;
      try {
        pair.result = polychoric(ContingencyTable::cross_tab(data, a, c.p_x + b));
        pair.ok = true;
      } catch (const Error& e) {
        pair.error = e.what();
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

CanonicalResult canonical_correlation(const Eigen::MatrixXd& sigma, int p_x) {
  const Eigen::Index p = sigma.rows();
  if (sigma.cols() != p || p_x < 1 || p_x >= p) throw InvalidArgument("canonical_correlation: bad partition");
  if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("canonical_correlation: matrix is not symmetric");
  }
  const Eigen::Index p_y = p - p_x;
  const Eigen::MatrixXd sxx = sigma.topLeftCorner(p_x, p_x);
  const Eigen::MatrixXd syy = sigma.bottomRightCorner(p_y, p_y);
  const Eigen::MatrixXd sxy = sigma.topRightCorner(p_x, p_y);
  auto factor = [](const Eigen::MatrixXd& block, const char* name) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(hi, 1e-300))) {
      throw InvalidArgument(std::string("canonical_correlation: ") + name + " block is singular");
    }
    return Eigen::LLT<Eigen::MatrixXd>(block);
  };
  const auto lx = factor(sxx, "X");
  const auto ly = factor(syy, "Y");
  // Whitened cross covariance Lx^{-1} Sxy Ly^{-T}.
  const Eigen::MatrixXd m = lx.matrixL().solve(ly.matrixL().solve(sxy.transpose()).transpose());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CanonicalResult out;
  out.rho_c = std::min(svd.singularValues()[0], 1.0);
  out.b_x = lx.matrixU().solve(Eigen::VectorXd(svd.matrixU().col(0)));
  out.b_y = ly.matrixU().solve(Eigen::VectorXd(svd.matrixV().col(0)));
  if (out.b_x.sum() < 0.0) {
    out.b_x = -out.b_x;
    out.b_y = -out.b_y;
  }
  return out;
}

Eigen::MatrixXd code_covariance(const OrdinalDataset& data) {
  const int p = data.config().num_variables();
  if (data.n() < 2) throw InvalidArgument("code_covariance: need at least two observations");
  Eigen::MatrixXd x(data.n(), p);
  for (int i = 0; i < data.n(); ++i) {
    for (int l = 0; l < p; ++l) x(i, l) = data.at(i, l);
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(data.n() - 1);
}

void SemSpec::validate() const {
  if (beta_x.empty() || beta_y.empty()) throw InvalidArgument("sem: both loading blocks must be nonempty");
  if (psi.size() != beta_x.size() + beta_y.size()) throw InvalidArgument("sem: psi needs one entry per variable");
  for (double v : psi) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("sem: residual variances must be finite and >= 0");
  }
  for (const auto* b : {&beta_x, &beta_y}) {
    for (double v : *b) {
      if (!std::isfinite(v)) throw InvalidArgument("sem: loadings must be finite");
    }
  }
  if (!(std::abs(rho) < 1.0)) throw InvalidArgument("sem: |rho| must be below 1");
}

namespace {

Eigen::MatrixXd loading_matrix(const SemSpec& spec) {
  const auto px = static_cast<Eigen::Index>(spec.beta_x.size());
  const auto py = static_cast<Eigen::Index>(spec.beta_y.size());
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(px + py, 2);
  lambda.col(0).head(px) = Eigen::Map<const Eigen::VectorXd>(spec.beta_x.data(), px);
  lambda.col(1).tail(py) = Eigen::Map<const Eigen::VectorXd>(spec.beta_y.data(), py);
  return lambda;
}

}  // namespace

Eigen::MatrixXd sem_implied_covariance(const SemSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd lambda = loading_matrix(spec);
  Eigen::Matrix2d r;
  r << 1.0, spec.rho, spec.rho, 1.0;
  Eigen::MatrixXd sigma = lambda * r * lambda.transpose();
  for (std::size_t l = 0; l < spec.psi.size(); ++l) sigma(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l)) += spec.psi[l];
  return sigma;
}

double sem_latent_correlation(const SemSpec& spec) {
  Eigen::MatrixXd s = sem_implied_covariance(spec);
  for (std::size_t l = 0; l < spec.psi.size(); ++l) s(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l)) -= spec.psi[l];
  const auto px = static_cast<Eigen::Index>(spec.beta_x.size());
  const auto py = static_cast<Eigen::Index>(spec.beta_y.size());
  const Eigen::Map<const Eigen::VectorXd> bx(spec.beta_x.data(), px);
  const Eigen::Map<const Eigen::VectorXd> by(spec.beta_y.data(), py);
  if (bx.squaredNorm() == 0.0 || by.squaredNorm() == 0.0) throw InvalidArgument("sem: zero loading vector");
  const double num = bx.dot(s.topRightCorner(px, py) * by);
  const double vx = bx.dot(s.topLeftCorner(px, px) * bx);
  const double vy = by.dot(s.bottomRightCorner(py, py) * by);
  return num / std::sqrt(vx * vy);
}

}  // namespace ordlatent
