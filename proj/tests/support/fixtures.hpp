#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ordlatent/model.hpp"

namespace fixture {

inline ordlatent::ParameterSet random_params(const ordlatent::ModelConfig& c, std::mt19937_64& gen,
                                             double loading_spread = 0.5) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> gap(0.4, 1.6);
  ordlatent::ParameterSet p;
  for (int s = 0; s < c.num_threshold_sets(); ++s) {
    std::vector<double> t{0.5 * n01(gen) - 0.5 * c.num_cutpoints()};
    for (int k = 1; k < c.num_cutpoints(); ++k) t.push_back(t.back() + gap(gen));
    p.thresholds.push_back(t);
  }
  for (int l = 0; l < c.p_x; ++l) p.loadings_x.push_back(1.0 + loading_spread * n01(gen));
  for (int l = 0; l < c.p_y; ++l) p.loadings_y.push_back(1.0 + loading_spread * n01(gen));
  p.rho = std::tanh(0.8 * n01(gen));
  return p;
}

inline std::vector<int> random_record(const ordlatent::ModelConfig& c, std::mt19937_64& gen) {
  std::vector<int> r(c.num_variables());
  for (auto& z : r) z = static_cast<int>(gen() % static_cast<unsigned>(c.q));
  return r;
}

/// Uniformly random codes; every category appears in every column when n >= q.
inline ordlatent::OrdinalDataset random_dataset(const ordlatent::ModelConfig& c, int n, std::mt19937_64& gen) {
  std::vector<int> codes;
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < c.num_variables(); ++l) {
      codes.push_back(i < c.q ? i : static_cast<int>(gen() % static_cast<unsigned>(c.q)));
    }
  }
  return ordlatent::OrdinalDataset(c, n, std::move(codes));
}

}  // namespace fixture
