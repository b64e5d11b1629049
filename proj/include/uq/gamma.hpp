#pragma once

namespace uq {

// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
// Series expansion below x < a + 1, Lentz continued fraction for Q above.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// P(X <= x) for X ~ chi^2(dof).
double chi2_cdf(double x, int dof);

// x with chi2_cdf(x, dof) = level, by bracketing and bisection.
// Throws LevelOutOfRange unless 0 < level < 1, ConfigInvalid for dof < 1.
double chi2_quantile(double level, int dof);

}  // namespace uq
