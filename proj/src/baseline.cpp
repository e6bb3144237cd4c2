#include "conq/baseline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "conq/error.hpp"
#include "conq/normal.hpp"

namespace conq {

KdeConfig KdeConfig::fixed(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("bandwidth must be a positive number");
  }
  KdeConfig c;
  c.normal_reference_ = false;
  c.bandwidth_ = bandwidth;
  return c;
}

KdeConfig KdeConfig::parse(std::string_view text) {
  if (text == "nrr" || text == "normal-reference") return normal_reference();
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("bandwidth must be 'nrr' or a positive number, got '" + std::string(text) +
                      "'");
  }
  return fixed(v);
}

std::string KdeConfig::describe() const {
  if (normal_reference_) return "normal-reference";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", bandwidth_);
  return buf;
}

double bandwidth_normal_reference(double sd, double iqr, std::size_t n) {
  if (n < 2) throw DomainError("normal reference rule needs at least 2 observations");
  if (sd < 0.0 || iqr < 0.0) throw DomainError("normal reference rule: negative spread");
  if (sd == 0.0 && iqr == 0.0) {
    throw DataError("normal reference rule: degenerate data (sd and IQR are both zero)");
  }
  // A zero IQR with positive sd would give h = 0; fall back to the other term.
  double spread = std::min(sd, iqr / 1.34);
  if (spread == 0.0) spread = std::max(sd, iqr / 1.34);
  return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

double sketch_sd(const Sketch& sketch) {
  const auto n = static_cast<double>(sketch.n_events());
  if (sketch.n_events() < 2) return 0.0;
  double mean = 0.0;
  for (std::size_t j = 0; j < sketch.size(); ++j) {
    mean += static_cast<double>(sketch.total_counts()[j]) * sketch.values()[j];
  }
  mean /= n;
  double ss = 0.0;
  for (std::size_t j = 0; j < sketch.size(); ++j) {
    const double d = sketch.values()[j] - mean;
    ss += static_cast<double>(sketch.total_counts()[j]) * d * d;
  }
  return std::sqrt(ss / (n - 1.0));
}

double sketch_iqr(const Sketch& sketch) {
  const auto f = ecdf(sketch);
  return quantile(f, 0.75) - quantile(f, 0.25);
}

double resolve_bandwidth(const Sketch& sketch, const KdeConfig& kde) {
  if (!kde.is_normal_reference()) return kde.fixed_bandwidth();
  return bandwidth_normal_reference(sketch_sd(sketch), sketch_iqr(sketch),
                                    static_cast<std::size_t>(sketch.n_events()));
}

double kde_density(const Sketch& sketch, double x, double h) {
  if (!(h > 0.0)) throw DomainError("kde_density: bandwidth must be positive");
  double sum = 0.0;
  for (std::size_t j = 0; j < sketch.size(); ++j) {
    const double z = (x - sketch.values()[j]) / h;
    if (std::abs(z) > 40.0) continue;  // phi(40) underflows to 0 anyway
    sum += static_cast<double>(sketch.total_counts()[j]) * normal_pdf(z);
  }
  return sum / (static_cast<double>(sketch.n_events()) * h);
}

namespace {

struct ArmEstimate {
  double q_log;
  double se_log;
};

ArmEstimate delta_arm(const Sketch& sketch, const CdfVariance& nu, double p,
                      const KdeConfig& kde) {
  const auto f = ecdf(sketch);
  if (nu.variances.size() != f.values.size()) {
    throw DataError("delta_qte: CDF variance does not match the sketch");
  }
  const std::size_t j = quantile_index(f, p);
  const double q = f.values[j];
  const double h = resolve_bandwidth(sketch, kde);
  const double density = kde_density(sketch, q, h);
  if (!(density > 1e-300)) {
    throw DataError("delta_qte: estimated density is zero at the quantile with bandwidth " +
                    kde.describe());
  }
  return {q, std::sqrt(std::max(0.0, nu.variances[j])) / density};
}

}  // namespace

QteRow delta_qte(const Sketch& control, const CdfVariance& nu_control, const Sketch& treatment,
                 const CdfVariance& nu_treatment, double p, const KdeConfig& kde, double alpha) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("delta_qte: p must lie in (0, 1)");
  const auto c = delta_arm(control, nu_control, p, kde);
  const auto t = delta_arm(treatment, nu_treatment, p, kde);
  return qte_row(p, c.q_log, t.q_log, c.se_log, t.se_log, alpha);
}

}  // namespace conq
