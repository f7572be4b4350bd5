#include "ordlatent/numeric.hpp"

#include <boost/math/distributions/normal.hpp>

#include "ordlatent/error.hpp"

namespace ordlatent {

double normal_cdf(double x) {
  if (std::isinf(x)) {
    return x > 0 ? 1.0 : 0.0;
  }
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("normal_quantile: probability must lie in (0, 1)");
  }
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace ordlatent
