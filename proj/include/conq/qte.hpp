#pragma once

#include <string_view>
#include <vector>

#include "conq/woodruff.hpp"

namespace conq {

// Percentage-change quantile treatment effect at one grid point.
struct QteRow {
  double percentile = 0.0;
  double q_control = 0.0;    // metric units
  double q_treatment = 0.0;  // metric units
  double delta_pct = 0.0;
  double se_pct = 0.0;
  double p_value = 1.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

// (exp(qt - qc) - 1) * 100.
double delta_percent(double qc_log, double qt_log);

// sqrt(se_c^2 + se_t^2) * exp(qt - qc) * 100.
double delta_se(double qc_log, double qt_log, double se_c_log, double se_t_log);

// Two-sided normal p-value of delta/se. A zero SE gives 1 when delta is 0
// and 0 otherwise.
double p_value(double delta_pct, double se_pct);

QteRow qte_row(double percentile, double qc_log, double qt_log, double se_c_log,
               double se_t_log, double alpha);

// One row per grid point; both analyses must share the same grid.
std::vector<QteRow> qte_grid(const GridAnalysis& control, const GridAnalysis& treatment,
                             double alpha);

// Percentiles lo, lo+step, ..., <= hi, returned as probabilities.
std::vector<double> make_grid(double lo_pct, double hi_pct, double step_pct);

// Parses "P<lo>:P<hi>:<step>", e.g. "P20:P99:1".
std::vector<double> parse_grid(std::string_view spec);

std::vector<double> default_grid();

}  // namespace conq
