#pragma once

// Reference association measures: polychoric correlation of a two-way ordinal
// table, first canonical correlation of a partitioned covariance matrix, and
// the latent correlation recovered from a normal factor model.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ordlatent/model.hpp"

namespace ordlatent {

class ContingencyTable {
 public:
  /// Row-major counts; throws InvalidArgument on negative counts, a shape
  /// mismatch or a zero total.
  ContingencyTable(int rows, int cols, std::vector<std::int64_t> counts);

  /// Cross-classification of two variables of a dataset (q x q).
  static ContingencyTable cross_tab(const OrdinalDataset& data, int var_x, int var_y);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::int64_t at(int i, int j) const { return counts_[static_cast<std::size_t>(i) * cols_ + j]; }
  std::int64_t total() const noexcept { return total_; }
  std::vector<std::int64_t> row_totals() const;
  std::vector<std::int64_t> col_totals() const;

  ContingencyTable transposed() const;
  ContingencyTable scaled(std::int64_t factor) const;
  /// Drops rows and columns whose total is zero.
  ContingencyTable without_empty_margins() const;

 private:
  int rows_;
  int cols_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho
/// (Genz's algorithm; infinite limits allowed). Throws InvalidArgument for
/// |rho| > 1 - 1e-12.
double bivariate_normal_cdf(double h, double k, double rho);

/// P(lower_x < X <= upper_x, lower_y < Y <= upper_y).
double bivariate_normal_rect(double lower_x, double lower_y, double upper_x, double upper_y, double rho);

inline constexpr double kPolychoricBoundary = 0.999;

struct PolychoricResult {
  double rho = 0.0;
  /// Cutpoints between consecutive nonempty categories.
  std::vector<double> thresholds_x;
  std::vector<double> thresholds_y;
  double log_likelihood = 0.0;
  /// |rho| reached the 0.999 guard.
  bool boundary = false;
  double two_step_rho = 0.0;
  double two_step_log_likelihood = 0.0;
};

/// Multinomial log-likelihood of the table under bivariate normal cutpoints.
double polychoric_log_likelihood(const ContingencyTable& table, const std::vector<double>& thresholds_x,
                                 const std::vector<double>& thresholds_y, double rho);

/// Inverse-normal cumulative marginal proportions (the two-step thresholds).
std::vector<double> marginal_thresholds(const std::vector<std::int64_t>& totals);

/// Full maximum likelihood over rho and both threshold sets, started from the
/// two-step estimate. Empty rows and columns are dropped first. Throws
/// UnidentifiedError when fewer than two rows or columns are nonempty.
PolychoricResult polychoric(const ContingencyTable& table);

struct PairwisePolychoric {
  int var_x = 0;  // index within the X block
  int var_y = 0;  // index within the Y block
  bool ok = false;
  std::string error;
  PolychoricResult result;
};

/// Polychoric correlation of every (X variable, Y variable) pair, X-major.
/// Degenerate pairs are reported with ok = false.
std::vector<PairwisePolychoric> pairwise_polychoric(const OrdinalDataset& data);

struct CanonicalResult {
  double rho_c = 0.0;
  Eigen::VectorXd b_x;  // unit variance weights
  Eigen::VectorXd b_y;
};

/// First canonical correlation between the leading p_x coordinates and the
/// rest. Throws InvalidArgument for a non-symmetric matrix or singular blocks.
CanonicalResult canonical_correlation(const Eigen::MatrixXd& sigma, int p_x);

/// Sample covariance (divisor n - 1) of the integer codes.
Eigen::MatrixXd code_covariance(const OrdinalDataset& data);

struct SemSpec {
  std::vector<double> beta_x;
  std::vector<double> beta_y;
  std::vector<double> psi;  // p_x + p_y residual variances
  double rho = 0.0;

  void validate() const;
};

/// Lambda R Lambda' + diag(psi).
Eigen::MatrixXd sem_implied_covariance(const SemSpec& spec);

/// beta_x' S_xy beta_y / sqrt(beta_x' S_xx beta_x * beta_y' S_yy beta_y) with S
/// the implied covariance minus diag(psi). Throws InvalidArgument when either
/// loading vector is zero.
double sem_latent_correlation(const SemSpec& spec);

}  // namespace ordlatent
