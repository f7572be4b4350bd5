#include "cli/report.hpp"

#include <cmath>

#include "ordlatent/version.hpp"

namespace ordlatent::cli {

using json = nlohmann::ordered_json;

namespace {

json interval_json(const Interval& i) {
  return json{{"method", to_string(i.method)}, {"level", i.level}, {"lower", i.lower}, {"upper", i.upper},
              {"clamped", i.clamped}};
}

Interval interval_from(const json& j) {
  Interval i;
  const auto m = j.at("method").get<std::string>();
  i.method = m == "bca" ? IntervalMethod::bca : m == "percentile" ? IntervalMethod::percentile : IntervalMethod::fisher;
  i.level = j.at("level").get<double>();
  i.lower = j.at("lower").get<double>();
  i.upper = j.at("upper").get<double>();
  i.clamped = j.at("clamped").get<bool>();
  return i;
}

json optional_interval(const std::optional<Interval>& i) { return i ? interval_json(*i) : json(nullptr); }

}  // namespace

FitReport make_fit_report(const FitResult& fit, const std::string& input, std::uint64_t seed,
                          const std::vector<std::string>& variable_names, const std::vector<std::string>& labels,
                          int n, const BootstrapReport* bootstrap, bool fisher_mean_correction) {
  FitReport r;
  r.version = kVersion;
  r.input = input;
  r.seed = seed;
  r.config = fit.config;
  r.n = n;
  r.variable_names = variable_names;
  r.params = fit.params;
  r.parameter_names = parameter_names(fit.config);
  r.estimates = flatten(fit.params);
  r.log_likelihood = fit.log_likelihood;
  r.rho_identified = fit.rho_identified;
  r.fisher_mean_correction = fisher_mean_correction;
  r.fisher = fisher_interval(fit.params.rho, n, 0.95, fisher_mean_correction);
  const auto k = static_cast<Eigen::Index>(r.estimates.size());
  const bool have_cov = fit.covariance.rows() == k;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (have_cov && fit.covariance(j, j) >= 0.0) {
      r.std_errors.emplace_back(std::sqrt(fit.covariance(j, j)));
    } else {
      r.std_errors.emplace_back(std::nullopt);
    }
  }
  if (have_cov) {
    for (Eigen::Index a = 0; a < k; ++a) {
      r.covariance.emplace_back();
      for (Eigen::Index b = 0; b < k; ++b) r.covariance.back().push_back(fit.covariance(a, b));
    }
  }
  r.diagnostics = {fit.converged, fit.iterations, fit.evaluations, fit.gradient_norm,
                   fit.best_start, fit.multimodal, fit.covariance_status, fit.starts};
  if (bootstrap != nullptr) {
    BootstrapSummary s;
    s.b = bootstrap->b;
    s.seed = bootstrap->seed;
    s.level = bootstrap->intervals.empty() ? 0.95 : bootstrap->intervals.front().level;
    s.successful_replicates = static_cast<int>(bootstrap->replicate_index.size());
    s.failed_replicates = bootstrap->failed_replicates;
    s.failed_jackknife = bootstrap->failed_jackknife;
    s.unreliable = bootstrap->unreliable;
    s.bias = bootstrap->bias;
    s.intervals = bootstrap->intervals;
    r.bca = s.intervals.back();
    r.bootstrap = std::move(s);
  }
  r.labels = labels;
  r.scores = fit.scores;
  return r;
}

void to_json(json& j, const FitReport& r) {
  j = json::object();
  j["tool"] = "ordlatent";
  j["version"] = r.version;
  j["command"] = "fit";
  j["input"] = r.input;
  j["seed"] = r.seed;
  j["config"] = {{"p_x", r.config.p_x},
                 {"p_y", r.config.p_y},
                 {"q", r.config.q},
                 {"shared_thresholds", r.config.shared_thresholds}};
  j["n"] = r.n;
  j["variables"] = r.variable_names;
  j["estimates"] = {{"thresholds", r.params.thresholds},
                    {"loadings_x", r.params.loadings_x},
                    {"loadings_y", r.params.loadings_y},
                    {"rho", r.params.rho}};
  json params = json::array();
  for (std::size_t i = 0; i < r.parameter_names.size(); ++i) {
    json p = {{"name", r.parameter_names[i]}, {"estimate", r.estimates[i]}};
    p["std_error"] = r.std_errors[i] ? json(*r.std_errors[i]) : json(nullptr);
    if (r.bootstrap) {
      p["bootstrap_bias"] = r.bootstrap->bias[i];
      p["interval"] = interval_json(r.bootstrap->intervals[i]);
    }
    params.push_back(std::move(p));
  }
  j["parameters"] = std::move(params);
  j["rho"] = {{"estimate", r.params.rho},
              {"identified", r.rho_identified},
              {"fisher_mean_correction", r.fisher_mean_correction},
              {"fisher", interval_json(r.fisher)},
              {"bca", optional_interval(r.bca)}};
  j["log_likelihood"] = r.log_likelihood;
  json starts = json::array();
  for (const auto& s : r.diagnostics.starts) {
    starts.push_back({{"log_likelihood", s.log_likelihood},
                      {"converged", s.converged},
                      {"iterations", s.iterations},
                      {"message", s.message}});
  }
  j["diagnostics"] = {{"converged", r.diagnostics.converged},
                      {"iterations", r.diagnostics.iterations},
                      {"evaluations", r.diagnostics.evaluations},
                      {"gradient_norm", r.diagnostics.gradient_norm},
                      {"best_start", r.diagnostics.best_start},
                      {"multimodal", r.diagnostics.multimodal},
                      {"covariance_status", r.diagnostics.covariance_status},
                      {"starts", std::move(starts)}};
  j["covariance"] = r.covariance.empty() ? json(nullptr) : json(r.covariance);
  if (r.bootstrap) {
    const auto& b = *r.bootstrap;
    j["bootstrap"] = {{"replicates", b.b},
                      {"seed", b.seed},
                      {"level", b.level},
                      {"successful_replicates", b.successful_replicates},
                      {"failed_replicates", b.failed_replicates},
                      {"failed_jackknife", b.failed_jackknife},
                      {"unreliable", b.unreliable}};
  } else {
    j["bootstrap"] = nullptr;
  }
  json scores = json::array();
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    scores.push_back({{"label", r.labels[i]}, {"f_x", r.scores[i].f_x}, {"f_y", r.scores[i].f_y}});
  }
  j["scores"] = std::move(scores);
}

void from_json(const json& j, FitReport& r) {
  r = FitReport{};
  r.version = j.at("version").get<std::string>();
  r.input = j.at("input").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const auto& c = j.at("config");
  r.config = {c.at("p_x").get<int>(), c.at("p_y").get<int>(), c.at("q").get<int>(),
              c.at("shared_thresholds").get<bool>()};
  r.n = j.at("n").get<int>();
  r.variable_names = j.at("variables").get<std::vector<std::string>>();
  const auto& e = j.at("estimates");
  r.params.thresholds = e.at("thresholds").get<std::vector<std::vector<double>>>();
  r.params.loadings_x = e.at("loadings_x").get<std::vector<double>>();
  r.params.loadings_y = e.at("loadings_y").get<std::vector<double>>();
  r.params.rho = e.at("rho").get<double>();
  std::optional<BootstrapSummary> boot;
  if (!j.at("bootstrap").is_null()) {
    const auto& b = j.at("bootstrap");
    BootstrapSummary s;
    s.b = b.at("replicates").get<int>();
    s.seed = b.at("seed").get<std::uint64_t>();
    s.level = b.at("level").get<double>();
    s.successful_replicates = b.at("successful_replicates").get<int>();
    s.failed_replicates = b.at("failed_replicates").get<int>();
    s.failed_jackknife = b.at("failed_jackknife").get<int>();
    s.unreliable = b.at("unreliable").get<bool>();
    boot = std::move(s);
  }
  for (const auto& p : j.at("parameters")) {
    r.parameter_names.push_back(p.at("name").get<std::string>());
    r.estimates.push_back(p.at("estimate").get<double>());
    const auto& se = p.at("std_error");
    r.std_errors.push_back(se.is_null() ? std::nullopt : std::optional<double>(se.get<double>()));
    if (boot) {
      boot->bias.push_back(p.at("bootstrap_bias").get<double>());
      boot->intervals.push_back(interval_from(p.at("interval")));
    }
  }
  r.bootstrap = std::move(boot);
  const auto& rho = j.at("rho");
  r.rho_identified = rho.at("identified").get<bool>();
  r.fisher_mean_correction = rho.at("fisher_mean_correction").get<bool>();
  r.fisher = interval_from(rho.at("fisher"));
  if (!rho.at("bca").is_null()) r.bca = interval_from(rho.at("bca"));
  r.log_likelihood = j.at("log_likelihood").get<double>();
  const auto& d = j.at("diagnostics");
  r.diagnostics.converged = d.at("converged").get<bool>();
  r.diagnostics.iterations = d.at("iterations").get<int>();
  r.diagnostics.evaluations = d.at("evaluations").get<int>();
  r.diagnostics.gradient_norm = d.at("gradient_norm").get<double>();
  r.diagnostics.best_start = d.at("best_start").get<int>();
  r.diagnostics.multimodal = d.at("multimodal").get<bool>();
  r.diagnostics.covariance_status = d.at("covariance_status").get<std::string>();
  for (const auto& s : d.at("starts")) {
    r.diagnostics.starts.push_back({s.at("log_likelihood").get<double>(), s.at("converged").get<bool>(),
                                    s.at("iterations").get<int>(), s.at("message").get<std::string>()});
  }
  if (!j.at("covariance").is_null()) r.covariance = j.at("covariance").get<std::vector<std::vector<double>>>();
  for (const auto& s : j.at("scores")) {
    r.labels.push_back(s.at("label").get<std::string>());
    r.scores.push_back({s.at("f_x").get<double>(), s.at("f_y").get<double>()});
  }
}

json monte_carlo_summary(const MonteCarloReport& report) {
  json j;
  j["tool"] = "ordlatent";
  j["version"] = kVersion;
  j["command"] = "mc";
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["n"] = report.n;
  j["replicates"] = report.n_reps;
  j["successes"] = report.successes();
  j["failures"] = report.failures;
  j["suspect"] = report.suspect;
  j["level"] = report.level;
  j["fisher_coverage"] = report.coverage;
  json params = json::array();
  for (std::size_t i = 0; i < report.bias.size(); ++i) {
    const auto& b = report.bias[i];
    params.push_back({{"name", b.name},
                      {"truth", b.truth},
                      {"mean_bias", b.mean},
                      {"q1", b.q1},
                      {"median_bias", b.median},
                      {"q3", b.q3},
                      {"lower_whisker", b.lower_whisker},
                      {"upper_whisker", b.upper_whisker},
                      {"outliers", b.outliers}});
  }
  j["bias"] = std::move(params);
  json errors = json::array();
  for (const auto& rep : report.replicates) {
    if (!rep.ok) errors.push_back({{"replicate", rep.replicate}, {"error", rep.error}});
  }
  j["errors"] = std::move(errors);
  return j;
}

json polychoric_json(const PolychoricResult& r) {
  return {{"rho", r.rho},
          {"boundary", r.boundary},
          {"thresholds_x", r.thresholds_x},
          {"thresholds_y", r.thresholds_y},
          {"log_likelihood", r.log_likelihood},
          {"two_step_rho", r.two_step_rho},
          {"two_step_log_likelihood", r.two_step_log_likelihood}};
}

json baselines_json(const BaselineInput& input, const std::vector<PairwisePolychoric>& pairs,
                    const std::optional<CanonicalResult>& canonical, const std::string& canonical_status) {
  json j;
  j["tool"] = "ordlatent";
  j["version"] = kVersion;
  j["command"] = "baselines";
  j["input"] = input.input;
  const int p_y = static_cast<int>(input.variable_names.size()) - input.p_x;
  json matrix = json::array();
  json details = json::array();
  for (int a = 0; a < input.p_x; ++a) {
    json row = json::array();
    for (int b = 0; b < p_y; ++b) {
      const auto& pair = pairs[static_cast<std::size_t>(a) * p_y + b];
      row.push_back(pair.ok ? json(pair.result.rho) : json(nullptr));
      json d = {{"x", input.variable_names[a]}, {"y", input.variable_names[input.p_x + b]}, {"ok", pair.ok}};
      if (pair.ok) {
        d["result"] = polychoric_json(pair.result);
      } else {
        d["error"] = pair.error;
      }
      details.push_back(std::move(d));
    }
    matrix.push_back(std::move(row));
  }
  j["x_variables"] = std::vector<std::string>(input.variable_names.begin(), input.variable_names.begin() + input.p_x);
  j["y_variables"] = std::vector<std::string>(input.variable_names.begin() + input.p_x, input.variable_names.end());
  j["polychoric"] = std::move(matrix);
  j["pairs"] = std::move(details);
  if (canonical) {
    j["canonical_correlation"] = {{"status", "ok"},
                                  {"rho_c", canonical->rho_c},
                                  {"b_x", std::vector<double>(canonical->b_x.begin(), canonical->b_x.end())},
                                  {"b_y", std::vector<double>(canonical->b_y.begin(), canonical->b_y.end())}};
  } else {
    j["canonical_correlation"] = {{"status", canonical_status}};
  }
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace ordlatent::cli
