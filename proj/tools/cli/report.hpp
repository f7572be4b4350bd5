#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordlatent/baselines.hpp"
#include "ordlatent/estimator.hpp"
#include "ordlatent/inference.hpp"
#include "ordlatent/simulate.hpp"

namespace ordlatent::cli {

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  int best_start = 0;
  bool multimodal = false;
  std::string covariance_status;
  std::vector<StartRecord> starts;

  friend bool operator==(const FitDiagnostics&, const FitDiagnostics&) = default;
};

struct BootstrapSummary {
  int b = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  int successful_replicates = 0;
  int failed_replicates = 0;
  int failed_jackknife = 0;
  bool unreliable = false;
  std::vector<double> bias;
  std::vector<Interval> intervals;

  friend bool operator==(const BootstrapSummary&, const BootstrapSummary&) = default;
};

struct FitReport {
  std::string version;
  std::string input;
  std::uint64_t seed = 0;
  ModelConfig config;
  int n = 0;
  std::vector<std::string> variable_names;
  ParameterSet params;
  std::vector<std::string> parameter_names;
  std::vector<double> estimates;
  std::vector<std::optional<double>> std_errors;  // sandwich, when available
  double log_likelihood = 0.0;
  bool rho_identified = true;
  bool fisher_mean_correction = true;
  Interval fisher;
  std::optional<Interval> bca;
  FitDiagnostics diagnostics;
  std::vector<std::vector<double>> covariance;  // natural parameters; empty when unavailable
  std::optional<BootstrapSummary> bootstrap;
  std::vector<std::string> labels;
  std::vector<LatentPoint> scores;

  friend bool operator==(const FitReport&, const FitReport&) = default;
};

FitReport make_fit_report(const FitResult& fit, const std::string& input, std::uint64_t seed,
                          const std::vector<std::string>& variable_names, const std::vector<std::string>& labels,
                          int n, const BootstrapReport* bootstrap, bool fisher_mean_correction = true);

void to_json(nlohmann::ordered_json& j, const FitReport& r);
void from_json(const nlohmann::ordered_json& j, FitReport& r);

nlohmann::ordered_json monte_carlo_summary(const MonteCarloReport& report);

struct BaselineInput {
  std::string input;
  int p_x = 0;
  std::vector<std::string> variable_names;
};

nlohmann::ordered_json baselines_json(const BaselineInput& input, const std::vector<PairwisePolychoric>& pairs,
                                      const std::optional<CanonicalResult>& canonical,
                                      const std::string& canonical_status);
nlohmann::ordered_json polychoric_json(const PolychoricResult& r);

/// Two-space indented dump with a trailing newline.
std::string dump(const nlohmann::ordered_json& j);

}  // namespace ordlatent::cli
