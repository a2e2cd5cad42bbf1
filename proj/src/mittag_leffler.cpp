#include "zeno/mittag_leffler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "zeno/error.hpp"
#include "zeno/quadrature.hpp"

namespace zeno {

namespace {

constexpr double kSeriesLimit = 1.0;
constexpr double kAsymptoticTolerance = 1e-10;
constexpr int kAsymptoticTerms = 3;
constexpr int kMaxSeriesTerms = 400;

void check_domain(double alpha, double x, const char* what) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError(std::string(what) + ": alpha must lie in (0, 1]");
  if (!(x >= 0.0) || std::isnan(x)) throw ValidationError(std::string(what) + ": argument must be >= 0");
}

// sum_k (-x)^k / Gamma(alpha k + beta)
double series(double alpha, double beta, double x) {
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const double term = power * reciprocal_gamma(alpha * k + beta);
    sum += term;
    if (k > 2 && std::abs(term) < 1e-16) break;
    power *= -x;
  }
  return sum;
}

// -sum_{k=1..3} (-x)^-k / Gamma(beta - alpha k)
double asymptotic(double alpha, double beta, double x) {
  double sum = 0.0;
  double inv = 1.0;
  for (int k = 1; k <= kAsymptoticTerms; ++k) {
    inv /= x;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum += sign * inv * reciprocal_gamma(beta - alpha * k);
  }
  return sum;
}

// int_{-inf}^{inf} du  (sin(a pi)/pi) e^{(a + extra) u} / ((e^{a u} + cos a pi)^2 + sin^2 a pi) exp(-s e^u)
// extra = 0 gives E_alpha(-s^alpha); extra = 1 gives the density.
double spectral_integral(double alpha, double s, int extra) {
  const double pi = std::numbers::pi;
  const double sa = std::sin(alpha * pi);
  const double ca = std::cos(alpha * pi);
  const double growth = alpha + extra;
  auto f = [=](double u) {
    const double ea = std::exp(alpha * u);
    const double den = (ea + ca) * (ea + ca) + sa * sa;
    return sa / pi * std::exp(growth * u - s * std::exp(u)) / den;
  };
  const double u_lo = std::log(1e-17 * growth * pi / sa) / growth;
  const double u_hi = std::log(60.0 / s) + 1.0;
  std::vector<double> breaks{0.0, -std::log(s)};
  if (ca < 0.0) breaks.push_back(std::log(-ca) / alpha);
  QuadratureOptions opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-13;
  opt.max_intervals = 20000;
  return integrate(f, u_lo, u_hi, opt, breaks).value;
}

}  // namespace

double reciprocal_gamma(double z) {
  if (z <= 0.0 && std::floor(z) == z) return 0.0;
  return 1.0 / std::tgamma(z);
}

double mittag_leffler_asymptotic_threshold(double alpha, double beta) {
  double x = kSeriesLimit;
  for (int k = kAsymptoticTerms + 1; k <= kAsymptoticTerms + 3; ++k) {
    const double c = std::abs(reciprocal_gamma(beta - alpha * k));
    if (c > 0.0) x = std::max(x, std::pow(c / kAsymptoticTolerance, 1.0 / k));
  }
  return x;
}

double mittag_leffler_neg(double alpha, double x) {
  check_domain(alpha, x, "mittag_leffler_neg");
  if (alpha == 1.0) return std::exp(-x);
  if (x <= kSeriesLimit) return series(alpha, 1.0, x);
  if (x >= mittag_leffler_asymptotic_threshold(alpha, 1.0)) return asymptotic(alpha, 1.0, x);
  return spectral_integral(alpha, std::pow(x, 1.0 / alpha), 0);
}

double mittag_leffler_density(double alpha, double s) {
  check_domain(alpha, s, "mittag_leffler_density");
  if (alpha == 1.0) return std::exp(-s);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  const double x = std::pow(s, alpha);
  const double prefactor = std::pow(s, alpha - 1.0);
  if (x <= kSeriesLimit) return prefactor * series(alpha, alpha, x);
  if (x >= mittag_leffler_asymptotic_threshold(alpha, alpha)) return prefactor * asymptotic(alpha, alpha, x);
  return spectral_integral(alpha, s, 1);
}

}  // namespace zeno
