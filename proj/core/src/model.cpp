#include "ordlatent/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ordlatent/error.hpp"
#include "ordlatent/numeric.hpp"

namespace ordlatent {

void ModelConfig::validate() const {
  if (p_x < 1 || p_y < 1) {
    throw InvalidArgument("model config: each block needs at least one variable");
  }
  if (q < 2) {
    throw InvalidArgument("model config: q must be at least 2");
  }
}

void ParameterSet::validate(const ModelConfig& config) const {
  config.validate();
  if (static_cast<int>(thresholds.size()) != config.num_threshold_sets()) {
    throw InvalidArgument("parameters: wrong number of threshold sequences");
  }
  for (const auto& seq : thresholds) {
    if (static_cast<int>(seq.size()) != config.num_cutpoints()) {
      throw InvalidArgument("parameters: threshold sequence must have q-1 entries");
    }
    for (std::size_t s = 0; s < seq.size(); ++s) {
      if (!std::isfinite(seq[s])) {
        throw InvalidArgument("parameters: non-finite threshold");
      }
      if (s > 0 && !(seq[s] > seq[s - 1])) {
        throw InvalidArgument("parameters: thresholds must be strictly increasing");
      }
    }
  }
  if (static_cast<int>(loadings_x.size()) != config.p_x ||
      static_cast<int>(loadings_y.size()) != config.p_y) {
    throw InvalidArgument("parameters: loading count does not match the block sizes");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(loadings_x.begin(), loadings_x.end(), finite) ||
      !std::all_of(loadings_y.begin(), loadings_y.end(), finite)) {
    throw InvalidArgument("parameters: non-finite loading");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw InvalidArgument("parameters: |rho| must be below 1");
  }
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

bool ParameterSet::satisfies_sign_convention() const {
  return mean(loadings_x) > 0.0 && mean(loadings_y) > 0.0;
}

BlockFlips sign_flips(const ParameterSet& params) {
  return {mean(params.loadings_x) < 0.0, mean(params.loadings_y) < 0.0};
}

ParameterSet reflect_blocks(ParameterSet params, BlockFlips flips) {
  if (flips.x) {
    for (double& b : params.loadings_x) b = -b;
  }
  if (flips.y) {
    for (double& b : params.loadings_y) b = -b;
  }
  if (flips.x != flips.y) {
    params.rho = -params.rho;
  }
  return params;
}

ParameterSet apply_sign_convention(ParameterSet params) {
  const BlockFlips flips = sign_flips(params);
  return reflect_blocks(std::move(params), flips);
}

int num_parameters(const ModelConfig& config) {
  return config.num_threshold_sets() * config.num_cutpoints() + config.num_variables() + 1;
}

int threshold_index(int var, int cutpoint, const ModelConfig& config) {
  return config.threshold_set_of(var) * config.num_cutpoints() + cutpoint;
}

int loading_index(int var, const ModelConfig& config) {
  return config.num_threshold_sets() * config.num_cutpoints() + var;
}

int rho_index(const ModelConfig& config) { return num_parameters(config) - 1; }

std::vector<double> flatten(const ParameterSet& params) {
  std::vector<double> out;
  for (const auto& seq : params.thresholds) out.insert(out.end(), seq.begin(), seq.end());
  out.insert(out.end(), params.loadings_x.begin(), params.loadings_x.end());
  out.insert(out.end(), params.loadings_y.begin(), params.loadings_y.end());
  out.push_back(params.rho);
  return out;
}

ParameterSet unflatten(std::span<const double> values, const ModelConfig& config) {
  if (static_cast<int>(values.size()) != num_parameters(config)) {
    throw InvalidArgument("unflatten: wrong parameter vector length");
  }
  ParameterSet p;
  auto it = values.begin();
  const auto cut = static_cast<std::ptrdiff_t>(config.num_cutpoints());
  for (int set = 0; set < config.num_threshold_sets(); ++set) {
    p.thresholds.emplace_back(it, it + cut);
    it += cut;
  }
  p.loadings_x.assign(it, it + config.p_x);
  it += config.p_x;
  p.loadings_y.assign(it, it + config.p_y);
  it += config.p_y;
  p.rho = *it;
  return p;
}

std::vector<std::string> parameter_names(const ModelConfig& config) {
  std::vector<std::string> names;
  for (int set = 0; set < config.num_threshold_sets(); ++set) {
    for (int s = 0; s < config.num_cutpoints(); ++s) {
      std::string name = "alpha";
      if (!config.shared_thresholds) name += "_" + std::to_string(set + 1);
      names.push_back(name + "[" + std::to_string(s + 1) + "]");
    }
  }
  for (int l = 0; l < config.p_x; ++l) names.push_back("beta_x[" + std::to_string(l + 1) + "]");
  for (int l = 0; l < config.p_y; ++l) names.push_back("beta_y[" + std::to_string(l + 1) + "]");
  names.emplace_back("rho");
  return names;
}

OrdinalDataset::OrdinalDataset(ModelConfig config, int n, std::vector<int> codes)
    : config_(config), n_(n), codes_(std::move(codes)) {
  config_.validate();
  if (n_ < 1) {
    throw InvalidArgument("dataset: need at least one observation");
  }
  if (codes_.size() != static_cast<std::size_t>(n_) * stride()) {
    throw InvalidArgument("dataset: code matrix has the wrong size");
  }
  for (int c : codes_) {
    if (c < 0 || c >= config_.q) {
      throw InvalidArgument("dataset: category code out of range");
    }
  }
}

OrdinalDataset OrdinalDataset::from_one_based(ModelConfig config,
                                              const std::vector<std::vector<int>>& rows) {
  std::vector<int> codes;
  codes.reserve(rows.size() * static_cast<std::size_t>(config.num_variables()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != config.num_variables()) {
      throw InvalidArgument("dataset: row " + std::to_string(i + 1) + " has the wrong length");
    }
    for (int c : rows[i]) {
      if (c < 1 || c > config.q) {
        throw InvalidArgument("dataset: row " + std::to_string(i + 1) + " has a code outside 1.." +
                              std::to_string(config.q));
      }
      codes.push_back(c - 1);
    }
  }
  return OrdinalDataset(config, static_cast<int>(rows.size()), std::move(codes));
}

std::vector<std::vector<int>> OrdinalDataset::to_one_based() const {
  std::vector<std::vector<int>> rows(n_);
  for (int i = 0; i < n_; ++i) {
    for (int c : row(i)) rows[i].push_back(c + 1);
  }
  return rows;
}

OrdinalDataset OrdinalDataset::reversed() const {
  std::vector<int> codes = codes_;
  for (int& c : codes) c = config_.q - 1 - c;
  return OrdinalDataset(config_, n_, std::move(codes));
}

OrdinalDataset OrdinalDataset::without_row(int i) const {
  if (n_ < 2) {
    throw InvalidArgument("dataset: cannot drop the only observation");
  }
  std::vector<int> codes;
  codes.reserve(codes_.size() - stride());
  for (int r = 0; r < n_; ++r) {
    if (r == i) continue;
    auto rec = row(r);
    codes.insert(codes.end(), rec.begin(), rec.end());
  }
  return OrdinalDataset(config_, n_ - 1, std::move(codes));
}

OrdinalDataset OrdinalDataset::with_config(ModelConfig config) const {
  if (config.p_x != config_.p_x || config.p_y != config_.p_y || config.q != config_.q) {
    throw InvalidArgument("dataset: new config must keep the block sizes and q");
  }
  return OrdinalDataset(config, n_, codes_);
}

int OrdinalDataset::distinct_categories(int var) const {
  std::vector<bool> seen(config_.q, false);
  for (int i = 0; i < n_; ++i) seen[at(i, var)] = true;
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

CategoryTerms category_terms(std::span<const double> cutpoints, int category, double shift) noexcept {
  CategoryTerms t;
  const int last = static_cast<int>(cutpoints.size());  // q - 1
  t.has_upper = category < last;
  t.has_lower = category > 0;
  double p_upper = 1.0;
  double p_lower = 0.0;
  double a = 0.0;
  double b = 0.0;
  if (t.has_upper) {
    a = cutpoints[category] + shift;
    p_upper = logistic(a);
    t.v_upper = p_upper * logistic(-a);
    t.k_upper = t.v_upper * (1.0 - 2.0 * p_upper);
  }
  if (t.has_lower) {
    b = cutpoints[category - 1] + shift;
    p_lower = logistic(b);
    t.v_lower = p_lower * logistic(-b);
    t.k_lower = t.v_lower * (1.0 - 2.0 * p_lower);
  }
  if (t.has_upper && t.has_lower) {
    // P = logistic(a) - logistic(b) = logistic(a) logistic(-b) (1 - e^{b-a})
    t.log_prob = log_logistic(a) + log_logistic(-b) + std::log(-std::expm1(b - a));
    t.d_upper = -1.0 / std::expm1(b - a) - p_upper;
    t.d_lower = -1.0 / std::expm1(a - b) - p_lower;
  } else if (t.has_upper) {
    t.log_prob = log_logistic(a);
    t.d_upper = logistic(-a);
  } else if (t.has_lower) {
    t.log_prob = log_logistic(-b);
    t.d_lower = -p_lower;
  }
  t.score = 1.0 - p_upper - p_lower;
  return t;
}

namespace {

void check_indices(const ModelConfig& config, int var, int category) {
  if (var < 0 || var >= config.num_variables()) {
    throw InvalidArgument("variable index out of range");
  }
  if (category < 0 || category >= config.q) {
    throw InvalidArgument("category index out of range");
  }
}

}  // namespace

double cumulative_prob(const ModelConfig& config, const ParameterSet& params, int var, int category,
                       LatentPoint f) {
  check_indices(config, var, category);
  params.validate(config);
  if (category == config.q - 1) {
    return 1.0;
  }
  const double shift = params.loading(var, config) * f[config.block_of(var)];
  return logistic(params.thresholds_of(var, config)[category] + shift);
}

double category_prob(const ModelConfig& config, const ParameterSet& params, int var, int category,
                     LatentPoint f) {
  check_indices(config, var, category);
  params.validate(config);
  const double shift = params.loading(var, config) * f[config.block_of(var)];
  return std::exp(category_terms(params.thresholds_of(var, config), category, shift).log_prob);
}

double conditional_log_density(const ModelConfig& config, const ParameterSet& params,
                               std::span<const int> record, LatentPoint f) {
  params.validate(config);
  if (static_cast<int>(record.size()) != config.num_variables()) {
    throw InvalidArgument("record length does not match the model");
  }
  double total = 0.0;
  for (int l = 0; l < config.num_variables(); ++l) {
    if (record[l] < 0 || record[l] >= config.q) {
      throw InvalidArgument("category index out of range");
    }
    const double shift = params.loading(l, config) * f[config.block_of(l)];
    total += category_terms(params.thresholds_of(l, config), record[l], shift).log_prob;
  }
  return total;
}

}  // namespace ordlatent
