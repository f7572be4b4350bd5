#pragma once

// Two-factor ordinal latent variable model with cumulative-logit links.
//
// Variables 0..p_x-1 form the X block and load on the first factor;
// variables p_x..p_x+p_y-1 form the Y block and load on the second. For
// variable l with category c (0-based) and factor value f:
//
//   P(Z_l <= c | f) = logistic(alpha_{l,c} + beta_l * f_block(l)),  c < q-1
//
// and P(Z_l <= q-1 | f) = 1. Category codes are 0-based everywhere in the
// library; the 1-based codes of panel files are converted at ingestion.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ordlatent {

enum class Block : int { x = 0, y = 1 };

struct ModelConfig {
  int p_x = 1;
  int p_y = 1;
  int q = 2;
  bool shared_thresholds = true;

  int num_variables() const noexcept { return p_x + p_y; }
  int num_cutpoints() const noexcept { return q - 1; }
  int num_threshold_sets() const noexcept { return shared_thresholds ? 1 : num_variables(); }
  int threshold_set_of(int var) const noexcept { return shared_thresholds ? 0 : var; }
  Block block_of(int var) const noexcept { return var < p_x ? Block::x : Block::y; }

  /// Throws InvalidArgument unless p_x >= 1, p_y >= 1 and q >= 2.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LatentPoint {
  double f_x = 0.0;
  double f_y = 0.0;

  double operator[](Block b) const noexcept { return b == Block::x ? f_x : f_y; }
  double& operator[](Block b) noexcept { return b == Block::x ? f_x : f_y; }

  friend bool operator==(const LatentPoint&, const LatentPoint&) = default;
};

struct ParameterSet {
  /// One strictly increasing sequence of q-1 cutpoints per threshold set
  /// (a single set when thresholds are shared).
  std::vector<std::vector<double>> thresholds;
  std::vector<double> loadings_x;
  std::vector<double> loadings_y;
  double rho = 0.0;

  double loading(int var, const ModelConfig& config) const {
    return var < config.p_x ? loadings_x[var] : loadings_y[var - config.p_x];
  }
  std::span<const double> thresholds_of(int var, const ModelConfig& config) const {
    return thresholds[config.threshold_set_of(var)];
  }

  /// Checks shapes, finiteness, strict threshold ordering and |rho| < 1.
  void validate(const ModelConfig& config) const;

  /// Mean loading of each block is positive.
  bool satisfies_sign_convention() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Which blocks must be reflected to satisfy the sign convention.
struct BlockFlips {
  bool x = false;
  bool y = false;
};

BlockFlips sign_flips(const ParameterSet& params);

/// Reflects the requested blocks: negates their loadings and, when exactly
/// one block is reflected, rho. The likelihood is unchanged.
ParameterSet reflect_blocks(ParameterSet params, BlockFlips flips);

/// Reflects whichever blocks have a negative mean loading.
ParameterSet apply_sign_convention(ParameterSet params);

// Natural parameter vector: thresholds (set-major), loadings_x, loadings_y, rho.
int num_parameters(const ModelConfig& config);
std::vector<double> flatten(const ParameterSet& params);
ParameterSet unflatten(std::span<const double> values, const ModelConfig& config);
std::vector<std::string> parameter_names(const ModelConfig& config);
int rho_index(const ModelConfig& config);
int loading_index(int var, const ModelConfig& config);
int threshold_index(int var, int cutpoint, const ModelConfig& config);

class OrdinalDataset {
 public:
  /// codes: n * (p_x + p_y) row-major, 0-based categories.
  OrdinalDataset(ModelConfig config, int n, std::vector<int> codes);

  /// Ingests 1-based category codes.
  static OrdinalDataset from_one_based(ModelConfig config, const std::vector<std::vector<int>>& rows);

  int n() const noexcept { return n_; }
  const ModelConfig& config() const noexcept { return config_; }
  std::span<const int> row(int i) const {
    return {codes_.data() + static_cast<std::size_t>(i) * stride(), stride()};
  }
  int at(int i, int var) const { return codes_[static_cast<std::size_t>(i) * stride() + var]; }
  const std::vector<int>& codes() const noexcept { return codes_; }

  std::vector<std::vector<int>> to_one_based() const;

  /// Maps every category c to q-1-c.
  OrdinalDataset reversed() const;
  OrdinalDataset without_row(int i) const;
  /// Same data under a different threshold-sharing choice.
  OrdinalDataset with_config(ModelConfig config) const;

  /// Number of distinct categories observed in the column of var.
  int distinct_categories(int var) const;

  friend bool operator==(const OrdinalDataset&, const OrdinalDataset&) = default;

 private:
  std::size_t stride() const noexcept { return static_cast<std::size_t>(config_.num_variables()); }

  ModelConfig config_;
  int n_;
  std::vector<int> codes_;
};

/// Per-variable quantities of log P(Z_l = c | shift) and its derivatives,
/// where shift = beta_l * f_block(l). "upper" refers to cutpoint c and
/// "lower" to cutpoint c-1; either may be absent at the ends of the scale.
struct CategoryTerms {
  double log_prob = 0.0;
  double d_upper = 0.0;  // d log P / d alpha_c
  double d_lower = 0.0;  // d log P / d alpha_{c-1}
  double score = 0.0;    // d log P / d shift = 1 - P_upper - P_lower
  double v_upper = 0.0;  // P_upper (1 - P_upper)
  double v_lower = 0.0;
  double k_upper = 0.0;  // P_upper (1 - P_upper) (1 - 2 P_upper)
  double k_lower = 0.0;
  bool has_upper = false;
  bool has_lower = false;

  /// Curvature: -d^2 log P / d shift^2.
  double weight() const noexcept { return v_upper + v_lower; }
  /// d weight / d shift.
  double weight_slope() const noexcept { return k_upper + k_lower; }
};

CategoryTerms category_terms(std::span<const double> cutpoints, int category, double shift) noexcept;

/// P(Z_var <= category | f). Category is 0-based.
double cumulative_prob(const ModelConfig& config, const ParameterSet& params, int var, int category,
                       LatentPoint f);

/// P(Z_var = category | f).
double category_prob(const ModelConfig& config, const ParameterSet& params, int var, int category,
                     LatentPoint f);

/// Sum over variables of log P(Z_l = z_l | f) for one observation record.
double conditional_log_density(const ModelConfig& config, const ParameterSet& params,
                               std::span<const int> record, LatentPoint f);

}  // namespace ordlatent
