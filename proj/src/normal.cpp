#include "conq/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "conq/error.hpp"

namespace conq {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double z_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("z_critical: alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<>{},
                                                       alpha / 2.0));
}

}  // namespace conq
