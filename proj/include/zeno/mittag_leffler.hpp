#pragma once

namespace zeno {

/// E_alpha(-x) for 0 < alpha <= 1 and x >= 0.
///
/// Power series for x <= 1, a three-term asymptotic expansion once its
/// first omitted term drops below 1e-10, and the spectral integral
///   E_alpha(-s^alpha) = int_0^inf exp(-r s) K_alpha(r) dr,
///   K_alpha(r) = sin(alpha pi) r^(alpha-1) / (pi (r^(2 alpha) + 2 r^alpha cos(alpha pi) + 1))
/// in between.  alpha = 1 returns exp(-x).
double mittag_leffler_neg(double alpha, double x);

/// -d/ds E_alpha(-s^alpha) = s^(alpha-1) E_{alpha,alpha}(-s^alpha), the density
/// of the standard Mittag-Leffler waiting time.  Same regions as above.
double mittag_leffler_density(double alpha, double s);

/// Crossover point x above which the asymptotic expansion is used
/// (beta = 1 for E_alpha, beta = alpha for the density kernel).
double mittag_leffler_asymptotic_threshold(double alpha, double beta);

/// 1 / Gamma(z), zero at the poles of Gamma.
double reciprocal_gamma(double z);

}  // namespace zeno
