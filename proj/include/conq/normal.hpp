#pragma once

namespace conq {

double normal_pdf(double x);
double normal_cdf(double x);

// Two-sided critical value z_{alpha/2}: P(|Z| > z) = alpha.
double z_critical(double alpha);

}  // namespace conq
