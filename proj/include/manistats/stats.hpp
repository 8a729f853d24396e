#pragma once

namespace manistats {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x)
// (series / continued-fraction evaluation).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with k degrees of freedom.
double chi2_sf(double x, int k);

}  // namespace manistats
