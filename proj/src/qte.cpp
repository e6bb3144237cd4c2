#include "conq/qte.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "conq/error.hpp"
#include "conq/normal.hpp"

namespace conq {

double delta_percent(double qc_log, double qt_log) {
  return std::expm1(qt_log - qc_log) * 100.0;
}

double delta_se(double qc_log, double qt_log, double se_c_log, double se_t_log) {
  if (se_c_log < 0.0 || se_t_log < 0.0) throw DomainError("delta_se: negative standard error");
  return std::hypot(se_c_log, se_t_log) * std::exp(qt_log - qc_log) * 100.0;
}

double p_value(double delta_pct, double se_pct) {
  if (se_pct < 0.0) throw DomainError("p_value: negative standard error");
  if (se_pct == 0.0) return delta_pct == 0.0 ? 1.0 : 0.0;
  return 2.0 * normal_cdf(-std::abs(delta_pct / se_pct));
}

QteRow qte_row(double percentile, double qc_log, double qt_log, double se_c_log,
               double se_t_log, double alpha) {
  const double z = z_critical(alpha);
  QteRow row;
  row.percentile = percentile;
  row.q_control = std::exp(qc_log);
  row.q_treatment = std::exp(qt_log);
  row.delta_pct = delta_percent(qc_log, qt_log);
  row.se_pct = delta_se(qc_log, qt_log, se_c_log, se_t_log);
  row.p_value = p_value(row.delta_pct, row.se_pct);
  row.ci_lower = row.delta_pct - z * row.se_pct;
  row.ci_upper = row.delta_pct + z * row.se_pct;
  return row;
}

std::vector<QteRow> qte_grid(const GridAnalysis& control, const GridAnalysis& treatment,
                             double alpha) {
  if (control.grid != treatment.grid) {
    throw DataError("qte_grid: control and treatment were evaluated on different grids");
  }
  std::vector<QteRow> rows;
  rows.reserve(control.grid.size());
  for (std::size_t i = 0; i < control.grid.size(); ++i) {
    rows.push_back(qte_row(control.grid[i], control.q_log[i], treatment.q_log[i],
                           control.se_log[i], treatment.se_log[i], alpha));
  }
  return rows;
}

std::vector<double> make_grid(double lo_pct, double hi_pct, double step_pct) {
  if (!(lo_pct > 0.0 && hi_pct <= 100.0 && lo_pct <= hi_pct && step_pct > 0.0)) {
    throw ConfigError("grid must satisfy 0 < lo <= hi <= 100 with a positive step");
  }
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    // Rounded to 1e-9 so that e.g. 20 + 3 * 0.1 lands on 20.3 exactly.
    const double pct = std::round((lo_pct + static_cast<double>(i) * step_pct) * 1e9) / 1e9;
    if (pct > hi_pct + 1e-9) break;
    grid.push_back(pct / 100.0);
  }
  return grid;
}

namespace {

double parse_number(std::string_view text, std::string_view spec) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("malformed grid spec '" + std::string(spec) + "'");
  }
  return v;
}

double parse_percentile(std::string_view text, std::string_view spec) {
  if (!text.empty() && (text.front() == 'P' || text.front() == 'p')) text.remove_prefix(1);
  return parse_number(text, spec);
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
  if (a == std::string_view::npos || b == std::string_view::npos ||
      spec.find(':', b + 1) != std::string_view::npos) {
    throw ConfigError("malformed grid spec '" + std::string(spec) + "', expected P<lo>:P<hi>:<step>");
  }
  const double lo = parse_percentile(spec.substr(0, a), spec);
  const double hi = parse_percentile(spec.substr(a + 1, b - a - 1), spec);
  const double step = parse_number(spec.substr(b + 1), spec);
  if (hi >= 100.0) throw ConfigError("grid upper end must be below P100");
  return make_grid(lo, hi, step);
}

std::vector<double> default_grid() { return make_grid(20.0, 99.0, 1.0); }

}  // namespace conq
