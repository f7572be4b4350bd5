#include "ordlatent/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ordlatent/error.hpp"
#include "ordlatent/inference.hpp"
#include "ordlatent/numeric.hpp"
#include "ordlatent/parallel.hpp"
#include "ordlatent/rng.hpp"

namespace ordlatent {

OrdinalDataset sample_dataset(const ParameterSet& params, const ModelConfig& config, int n, std::uint64_t seed) {
  params.validate(config);
  if (n < 1) throw InvalidArgument("sample_dataset: n must be at least 1");
  const int p = config.num_variables();
  const double mix = std::sqrt((1.0 - params.rho) * (1.0 + params.rho));
  std::vector<int> codes(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i) {
    StreamRng rng(stream_key({seed, static_cast<std::uint64_t>(i)}));
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const LatentPoint f{z1, params.rho * z1 + mix * z2};
    for (int l = 0; l < p; ++l) {
      const double u = rng.uniform();
      const double shift = params.loading(l, config) * f[config.block_of(l)];
      const auto cut = params.thresholds_of(l, config);
      int c = 0;
      while (c < config.q - 1 && u > logistic(cut[c] + shift)) ++c;
      codes[static_cast<std::size_t>(i) * p + l] = c;
    }
  }
  return OrdinalDataset(config, n, std::move(codes));
}

Scenario builtin_scenario(const std::string& name, double rho) {
  if (!(std::abs(rho) < 1.0)) throw InvalidArgument("scenario: |rho| must be below 1");
  Scenario s;
  s.config = ModelConfig{5, 5, 5, true};
  if (name == "S1" || name == "s1") {
    s.params.thresholds = {{-4.60, -2.94, 0.85, 4.60}};
  } else if (name == "S2" || name == "s2") {
    s.params.thresholds = {{-2.19, -1.39, 1.39, 2.19}};
  } else {
    throw InvalidArgument("unknown scenario '" + name + "' (expected S1 or S2)");
  }
  s.name = name == "s1" ? "S1" : name == "s2" ? "S2" : name;
  s.params.loadings_x = {1.60, 1.75, 1.70, 1.30, 1.50};
  s.params.loadings_y = {5.00, 9.00, 9.00, 5.00, 6.00};
  s.params.rho = rho;
  s.n = 30;
  s.n_reps = 500;
  return s;
}

BiasSummary summarize_bias(const std::string& name, double truth, std::vector<double> estimates) {
  BiasSummary s;
  s.name = name;
  s.truth = truth;
  if (estimates.empty()) return s;
  for (double& e : estimates) e -= truth;
  std::sort(estimates.begin(), estimates.end());
  s.mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(estimates.size());
  s.q1 = empirical_quantile(estimates, 0.25);
  s.median = empirical_quantile(estimates, 0.5);
  s.q3 = empirical_quantile(estimates, 0.75);
  const double reach = 1.5 * (s.q3 - s.q1);
  s.lower_whisker = s.q1;
  s.upper_whisker = s.q3;
  for (double e : estimates) {
    if (e < s.q1 - reach || e > s.q3 + reach) {
      ++s.outliers;
      continue;
    }
    s.lower_whisker = std::min(s.lower_whisker, e);
    s.upper_whisker = std::max(s.upper_whisker, e);
  }
  return s;
}

MonteCarloReport run_monte_carlo(const Scenario& scenario, std::uint64_t seed, const MonteCarloOptions& opts) {
  scenario.params.validate(scenario.config);
  if (scenario.n < 4) throw InvalidArgument("monte carlo: n must be at least 4 for the Fisher interval");
  if (scenario.n_reps < 1) throw InvalidArgument("monte carlo: need at least one replicate");

  MonteCarloReport report;
  report.scenario = scenario.name;
  report.seed = seed;
  report.n = scenario.n;
  report.n_reps = scenario.n_reps;
  report.level = opts.level;
  report.parameter_names = parameter_names(scenario.config);
  report.truth = flatten(scenario.params);
  report.replicates.resize(static_cast<std::size_t>(scenario.n_reps));

  parallel_for(report.replicates.size(), opts.threads, [&](std::size_t r) {
    ReplicateOutcome& out = report.replicates[r];
    out.replicate = static_cast<int>(r);
    try {
      const OrdinalDataset data = sample_dataset(scenario.params, scenario.config, scenario.n, stream_key({seed, r}));
      FitOptions fopts = opts.fit;
      fopts.seed = stream_key({seed, r, 1});
      fopts.compute_covariance = false;
      const FitResult fitted = fit(data, fopts);
      out.estimates = flatten(fitted.params);
      const Interval ci = fisher_interval(fitted.params.rho, scenario.n, opts.level, opts.fisher_mean_correction);
      out.fisher_lower = ci.lower;
      out.fisher_upper = ci.upper;
      out.covers = ci.contains(scenario.params.rho);
      out.ok = true;
    } catch (const Error& e) {
      out.ok = false;
      out.error = e.what();
    }
  });

  int covered = 0;
  for (const auto& rep : report.replicates) {
    if (!rep.ok) {
      ++report.failures;
      continue;
    }
    report.rho_estimates.push_back(rep.estimates.back());
    covered += rep.covers ? 1 : 0;
  }
  const int ok = report.successes();
  report.coverage = ok > 0 ? static_cast<double>(covered) / ok : 0.0;
  report.suspect = report.failures > 0.05 * report.n_reps;
  for (std::size_t j = 0; j < report.truth.size(); ++j) {
    std::vector<double> column;
    for (const auto& rep : report.replicates) {
      if (rep.ok) column.push_back(rep.estimates[j]);
    }
    report.bias.push_back(summarize_bias(report.parameter_names[j], report.truth[j], std::move(column)));
  }
  return report;
}

}  // namespace ordlatent
