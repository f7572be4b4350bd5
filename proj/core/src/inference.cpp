#include "ordlatent/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "ordlatent/error.hpp"
#include "ordlatent/numeric.hpp"
#include "ordlatent/parallel.hpp"
#include "ordlatent/rng.hpp"
#include "ordlatent/simulate.hpp"

namespace ordlatent {

std::string to_string(IntervalMethod m) {
  switch (m) {
    case IntervalMethod::fisher:
      return "fisher";
    case IntervalMethod::bca:
      return "bca";
    case IntervalMethod::percentile:
      return "percentile";
  }
  return "unknown";
}

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
}

}  // namespace

Interval fisher_interval(double rho_hat, int n, double level, bool mean_correction) {
  check_level(level);
  if (!(std::abs(rho_hat) < 1.0)) throw InvalidArgument("fisher_interval: |rho_hat| must be below 1");
  if (n < 4) throw InvalidArgument("fisher_interval: need n >= 4");
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double eta = std::atanh(rho_hat);
  const double half = z / std::sqrt(static_cast<double>(n - 3));
  const double shift = mean_correction ? rho_hat / (2.0 * (n - 1)) : 0.0;
  return {std::tanh(eta - half - shift), std::tanh(eta + half - shift), level, IntervalMethod::fisher, false};
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("empirical_quantile: empty sample");
  p = std::clamp(p, 0.0, 1.0);
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Interval percentile_interval(std::span<const double> replicates, double level) {
  check_level(level);
  std::vector<double> sorted(replicates.begin(), replicates.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = 0.5 * (1.0 - level);
  return {empirical_quantile(sorted, tail), empirical_quantile(sorted, 1.0 - tail), level,
          IntervalMethod::percentile, false};
}

double jackknife_acceleration(std::span<const double> jackknife) {
  if (jackknife.size() < 2) return 0.0;
  const double mean = std::accumulate(jackknife.begin(), jackknife.end(), 0.0) / static_cast<double>(jackknife.size());
  double s2 = 0.0;
  double s3 = 0.0;
  for (double v : jackknife) {
    const double d = mean - v;
    s2 += d * d;
    s3 += d * d * d;
  }
  if (s2 <= 0.0) return 0.0;
  return s3 / (6.0 * std::pow(s2, 1.5));
}

Interval bca_interval(std::span<const double> replicates, std::span<const double> jackknife, double original,
                      double level) {
  check_level(level);
  if (replicates.size() < 2) throw InvalidArgument("bca_interval: need at least two replicates");
  std::vector<double> sorted(replicates.begin(), replicates.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw InvalidArgument("bca_interval: all replicates are identical");

  const auto b = static_cast<double>(sorted.size());
  const auto below = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), original) - sorted.begin());
  double fraction = below / b;
  Interval out{0.0, 0.0, level, IntervalMethod::bca, false};
  if (fraction <= 0.0 || fraction >= 1.0) {
    fraction = std::clamp(fraction, 0.5 / b, 1.0 - 0.5 / b);
    out.clamped = true;
  }
  const double z0 = normal_quantile(fraction);
  const double a = jackknife_acceleration(jackknife);
  auto adjusted = [&](double z) {
    const double num = z0 + z;
    const double den = 1.0 - a * num;
    if (den <= 0.0) return num > 0.0 ? 1.0 : 0.0;
    return normal_cdf(z0 + num / den);
  };
  const double z_lo = normal_quantile(0.5 * (1.0 - level));
  out.lower = empirical_quantile(sorted, adjusted(z_lo));
  out.upper = empirical_quantile(sorted, adjusted(-z_lo));
  return out;
}

namespace {

std::optional<std::vector<double>> refit(const OrdinalDataset& sample, const FitResult& original,
                                         const FitOptions& base, std::uint64_t seed) {
  FitOptions opts = base;
  opts.initial = original.params;
  opts.n_starts = 1;
  opts.compute_covariance = false;
  opts.seed = seed;
  try {
    return flatten(fit(sample, opts).params);
  } catch (const UnidentifiedError&) {
    return std::nullopt;
  } catch (const Error&) {
  }
  opts.initial.reset();
  opts.n_starts = std::max(3, base.n_starts);
  try {
    return flatten(fit(sample, opts).params);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

BootstrapReport parametric_bootstrap(const OrdinalDataset& data, const FitResult& fitted,
                                     const BootstrapOptions& opts) {
  if (!fitted.converged) throw InvalidArgument("bootstrap: the original fit did not converge");
  if (opts.b < 2) throw InvalidArgument("bootstrap: need at least two replicates");
  check_level(opts.level);
  const ModelConfig& config = data.config();
  const int k = num_parameters(config);

  BootstrapReport report;
  report.b = opts.b;
  report.seed = opts.seed;
  report.parameter_names = parameter_names(config);
  report.original = flatten(fitted.params);

  std::vector<std::optional<std::vector<double>>> rows(static_cast<std::size_t>(opts.b));
  parallel_for(rows.size(), opts.threads, [&](std::size_t r) {
    const OrdinalDataset sample = sample_dataset(fitted.params, config, data.n(), stream_key({opts.seed, r}));
    rows[r] = refit(sample, fitted, opts.fit, stream_key({opts.seed, r, 1}));
  });

  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r]) {
      report.replicate_index.push_back(static_cast<int>(r));
    } else {
      ++report.failed_replicates;
    }
  }
  if (report.replicate_index.empty()) throw ConvergenceError("bootstrap: every replicate refit failed");
  report.unreliable = report.failed_replicates > 0.2 * opts.b;
  report.estimates.resize(static_cast<Eigen::Index>(report.replicate_index.size()), k);
  for (std::size_t i = 0; i < report.replicate_index.size(); ++i) {
    const auto& row = *rows[static_cast<std::size_t>(report.replicate_index[i])];
    for (int j = 0; j < k; ++j) report.estimates(static_cast<Eigen::Index>(i), j) = row[j];
  }

  std::vector<std::vector<double>> jack_columns(static_cast<std::size_t>(k));
  if (opts.jackknife) {
    std::vector<std::optional<std::vector<double>>> jack(static_cast<std::size_t>(data.n()));
    parallel_for(jack.size(), opts.threads, [&](std::size_t i) {
      jack[i] = refit(data.without_row(static_cast<int>(i)), fitted, opts.fit,
                      stream_key({opts.seed, std::uint64_t{0xa11ce}, i}));
    });
    report.jackknife = Eigen::MatrixXd::Constant(data.n(), k, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < jack.size(); ++i) {
      if (!jack[i]) {
        ++report.failed_jackknife;
        continue;
      }
      for (int j = 0; j < k; ++j) {
        report.jackknife(static_cast<Eigen::Index>(i), j) = (*jack[i])[j];
        jack_columns[j].push_back((*jack[i])[j]);
      }
    }
  }

  for (int j = 0; j < k; ++j) {
    std::vector<double> column(report.estimates.col(j).data(),
                               report.estimates.col(j).data() + report.estimates.rows());
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
    report.bias.push_back(mean - report.original[j]);
    try {
      report.intervals.push_back(bca_interval(column, jack_columns[j], report.original[j], opts.level));
    } catch (const InvalidArgument&) {
      report.intervals.push_back(percentile_interval(column, opts.level));
    }
  }
  return report;
}

}  // namespace ordlatent
