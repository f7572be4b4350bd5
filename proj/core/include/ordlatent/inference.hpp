#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ordlatent/estimator.hpp"

namespace ordlatent {

enum class IntervalMethod { fisher, bca, percentile };

std::string to_string(IntervalMethod m);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::fisher;
  /// Set when the BCa bias constant had to be clamped (no replicate on one side).
  bool clamped = false;

  bool contains(double v) const noexcept { return lower <= v && v <= upper; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// tanh of atanh(rho_hat) -/+ z / sqrt(n - 3), shifted by -rho_hat / (2 (n - 1))
/// when mean_correction is set. Throws InvalidArgument for |rho_hat| >= 1,
/// n < 4 or level outside (0, 1).
Interval fisher_interval(double rho_hat, int n, double level, bool mean_correction = true);

/// Linear-interpolation sample quantile (R type 7) of sorted data.
double empirical_quantile(std::span<const double> sorted, double p);

Interval percentile_interval(std::span<const double> replicates, double level);

/// Bias-corrected and accelerated interval. z0 = Phi^{-1}(fraction of
/// replicates below original); acceleration from the skewness of the
/// jackknife values; endpoints are type-7 quantiles of the replicates at
/// Phi(z0 + (z0 + z_a) / (1 - a (z0 + z_a))). Throws InvalidArgument when all
/// replicates are identical.
Interval bca_interval(std::span<const double> replicates, std::span<const double> jackknife, double original,
                      double level);

/// Acceleration constant from leave-one-out estimates.
double jackknife_acceleration(std::span<const double> jackknife);

struct BootstrapOptions {
  int b = 1000;
  std::uint64_t seed = kDefaultSeed;
  double level = 0.95;
  int threads = 0;
  bool jackknife = true;  // leave-one-out refits for the BCa acceleration; a = 0 otherwise
  FitOptions fit;         // template for replicate refits
};

struct BootstrapReport {
  int b = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> parameter_names;
  std::vector<double> original;
  Eigen::MatrixXd estimates;           // successful replicates x k, replicate order
  std::vector<int> replicate_index;    // source replicate of every row
  std::vector<double> bias;            // mean replicate - original
  std::vector<Interval> intervals;
  Eigen::MatrixXd jackknife;           // n x k leave-one-out estimates (empty if disabled)
  int failed_replicates = 0;
  int failed_jackknife = 0;
  bool unreliable = false;             // more than 20% of replicates failed
};

/// Draws b datasets from the fitted model and refits each, starting from the
/// original estimate with one multi-start fallback on failure. Replicate r uses
/// stream_key({seed, r}) so results are identical at any thread count.
BootstrapReport parametric_bootstrap(const OrdinalDataset& data, const FitResult& fit,
                                     const BootstrapOptions& opts = {});

}  // namespace ordlatent
