#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "conq/blb.hpp"
#include "conq/qte.hpp"
#include "conq/sketch.hpp"

namespace conq {

// Kernel bandwidth on the log scale: a fixed value or the normal reference rule.
class KdeConfig {
 public:
  static KdeConfig fixed(double bandwidth);
  static KdeConfig normal_reference() { return KdeConfig(); }
  // "nrr" or a positive number.
  static KdeConfig parse(std::string_view text);

  bool is_normal_reference() const { return normal_reference_; }
  double fixed_bandwidth() const { return bandwidth_; }
  std::string describe() const;

 private:
  KdeConfig() = default;
  bool normal_reference_ = true;
  double bandwidth_ = 0.0;
};

// 1.06 * min(sd, iqr / 1.34) * n^(-1/5).
double bandwidth_normal_reference(double sd, double iqr, std::size_t n);

// Event-weighted sample standard deviation of the sketch values.
double sketch_sd(const Sketch& sketch);

// Q(0.75) - Q(0.25) of the sketch values.
double sketch_iqr(const Sketch& sketch);

double resolve_bandwidth(const Sketch& sketch, const KdeConfig& kde);

// Gaussian KDE over the grouped sketch: (n h)^-1 sum_j c_j phi((x - X_j) / h).
double kde_density(const Sketch& sketch, double x, double h);

// Density-based QTE at probability p. Per arm the log-quantile SE is
// sqrt(nu at the quantile's knot) / f_hat(quantile).
QteRow delta_qte(const Sketch& control, const CdfVariance& nu_control, const Sketch& treatment,
                 const CdfVariance& nu_treatment, double p, const KdeConfig& kde, double alpha);

}  // namespace conq
