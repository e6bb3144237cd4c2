#pragma once

#include <span>
#include <vector>

#include "conq/blb.hpp"
#include "conq/sketch.hpp"

namespace conq {

// Quantile-scale standard error at every ECDF knot.
struct QuantileSeKnots {
  std::vector<double> fractions;
  std::vector<double> se_log;
};

struct WoodruffBounds {
  double lower;
  double upper;
};

// inf{t : F_n(t) >= target} over the sketch values, with targets below the
// first fraction clamped to the first value and above 1 to the last.
double ecdf_inverse_clamped(const Ecdf& ecdf, double target);

// One-SE Woodruff band around knot j: CDF targets F_n(X_j) -/+ offset.
WoodruffBounds woodruff_bounds(const Ecdf& ecdf, std::size_t j, double offset);

// SE(X_j) = max(X_j - lower, upper - X_j) with offset sqrt(nu_j).
QuantileSeKnots woodruff_se(const Ecdf& ecdf, const CdfVariance& nu);

// Per-arm quantiles and SEs on a common probability grid.
struct GridAnalysis {
  std::vector<double> grid;
  std::vector<double> q_log;
  std::vector<double> se_log;
};

// Piecewise-linear interpolation of SE against knot fraction; flat below the
// first knot. Grid must be non-empty, ascending, inside (0, 1].
GridAnalysis interpolate_to_grid(const Ecdf& ecdf, const QuantileSeKnots& knots,
                                 std::span<const double> grid);

}  // namespace conq
