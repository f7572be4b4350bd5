#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordlatent/estimator.hpp"
#include "ordlatent/model.hpp"

namespace ordlatent {

struct Scenario {
  std::string name;
  ModelConfig config;
  ParameterSet params;
  int n = 30;
  int n_reps = 500;
};

/// Draws n records: F ~ N(0, R) built as f_x = z1, f_y = rho z1 + sqrt(1 - rho^2) z2,
/// then every category independently given F by inverting the cumulative
/// probabilities. Observation i uses the stream stream_key({seed, i}).
OrdinalDataset sample_dataset(const ParameterSet& params, const ModelConfig& config, int n, std::uint64_t seed);

/// Built-in designs "S1" and "S2": 5 + 5 variables, q = 5, shared thresholds,
/// loadings (1.60, 1.75, 1.70, 1.30, 1.50) on X and (5, 9, 9, 5, 6) on Y, n = 30,
/// 500 replicates. Throws InvalidArgument for unknown names or |rho| >= 1.
Scenario builtin_scenario(const std::string& name, double rho);

struct MonteCarloOptions {
  int threads = 0;  // 0 = hardware concurrency
  double level = 0.95;
  bool fisher_mean_correction = true;
  FitOptions fit;
};

/// Boxplot statistics of the replicate bias estimate - truth for one parameter.
struct BiasSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lower_whisker = 0.0;  // most extreme values within 1.5 IQR of the box
  double upper_whisker = 0.0;
  int outliers = 0;
};

struct ReplicateOutcome {
  int replicate = 0;
  bool ok = false;
  std::string error;
  std::vector<double> estimates;  // natural parameters, flatten order
  bool covers = false;            // Fisher interval contains the true rho
  double fisher_lower = 0.0;
  double fisher_upper = 0.0;
};

struct MonteCarloReport {
  std::string scenario;
  std::uint64_t seed = 0;
  int n = 0;
  int n_reps = 0;
  double level = 0.95;
  std::vector<std::string> parameter_names;
  std::vector<double> truth;
  std::vector<ReplicateOutcome> replicates;
  std::vector<BiasSummary> bias;
  std::vector<double> rho_estimates;  // successful replicates, in replicate order
  double coverage = 0.0;              // over successful replicates
  int failures = 0;
  bool suspect = false;               // failures above 5% of the replicates

  int successes() const noexcept { return n_reps - failures; }
};

BiasSummary summarize_bias(const std::string& name, double truth, std::vector<double> estimates);

/// For each replicate r: sample with stream_key({seed, r}), fit with multi-start
/// seed stream_key({seed, r, 1}), record estimates and Fisher coverage of the
/// true rho. Replicates run concurrently; the report does not depend on the
/// thread count.
MonteCarloReport run_monte_carlo(const Scenario& scenario, std::uint64_t seed, const MonteCarloOptions& opts = {});

}  // namespace ordlatent
