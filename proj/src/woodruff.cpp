#include "conq/woodruff.hpp"

#include <algorithm>
#include <cmath>

#include "conq/error.hpp"

namespace conq {

double ecdf_inverse_clamped(const Ecdf& ecdf, double target) {
  const auto& f = ecdf.cum_fractions;
  const auto it = std::lower_bound(f.begin(), f.end(), target);
  if (it == f.end()) return ecdf.values.back();
  return ecdf.values[static_cast<std::size_t>(it - f.begin())];
}

WoodruffBounds woodruff_bounds(const Ecdf& ecdf, std::size_t j, double offset) {
  const double f = ecdf.cum_fractions.at(j);
  if (offset == 0.0) return {ecdf.values[j], ecdf.values[j]};
  return {ecdf_inverse_clamped(ecdf, f - offset), ecdf_inverse_clamped(ecdf, f + offset)};
}

QuantileSeKnots woodruff_se(const Ecdf& ecdf, const CdfVariance& nu) {
  if (ecdf.values.size() != nu.values.size() || nu.variances.size() != nu.values.size() ||
      !std::equal(ecdf.values.begin(), ecdf.values.end(), nu.values.begin())) {
    throw DataError("woodruff_se: ECDF and CDF variance are defined on different values");
  }
  QuantileSeKnots out;
  out.fractions = ecdf.cum_fractions;
  out.se_log.resize(ecdf.values.size());
  for (std::size_t j = 0; j < ecdf.values.size(); ++j) {
    const double x = ecdf.values[j];
    const auto [lo, hi] = woodruff_bounds(ecdf, j, std::sqrt(std::max(0.0, nu.variances[j])));
    out.se_log[j] = std::max(x - lo, hi - x);
  }
  return out;
}

GridAnalysis interpolate_to_grid(const Ecdf& ecdf, const QuantileSeKnots& knots,
                                 std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("interpolate_to_grid: empty grid");
  if (knots.fractions.size() != knots.se_log.size() || knots.fractions.empty()) {
    throw DataError("interpolate_to_grid: malformed knots");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 1.0)) {
      throw ConfigError("interpolate_to_grid: grid points must lie in (0, 1]");
    }
    if (i > 0 && !(grid[i - 1] < grid[i])) {
      throw ConfigError("interpolate_to_grid: grid must be strictly ascending");
    }
  }
  const auto& fx = knots.fractions;
  const auto& se = knots.se_log;

  GridAnalysis out;
  out.grid.assign(grid.begin(), grid.end());
  out.q_log.reserve(grid.size());
  out.se_log.reserve(grid.size());
  for (double p : grid) {
    out.q_log.push_back(quantile(ecdf, p));
    const auto it = std::lower_bound(fx.begin(), fx.end(), p);
    double value;
    if (it == fx.begin()) {
      value = se.front();
    } else if (it == fx.end()) {
      value = se.back();
    } else {
      const auto hi = static_cast<std::size_t>(it - fx.begin());
      const auto lo = hi - 1;
      if (fx[hi] == p) {
        value = se[hi];
      } else {
        const double t = (p - fx[lo]) / (fx[hi] - fx[lo]);
        value = se[lo] + t * (se[hi] - se[lo]);
      }
    }
    out.se_log.push_back(value);
  }
  return out;
}

}  // namespace conq
