#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "zeno/survival_curve.hpp"

namespace zeno {

enum class LaplaceMethod { supermatrix, scalar, poisson_closed, anomalous_closed, relaxed_anomalous_closed, custom };

std::string to_string(LaplaceMethod m);

/// A Laplace-domain survival function p~(eps), analytic for Re eps > singularity_abscissa.
/// bandwidth is the largest angular frequency of undamped or weakly damped
/// oscillation in p(t), i.e. the largest |Im| of singularities near the
/// imaginary axis; zero when p(t) does not oscillate.
struct LaplaceSurvival {
  std::function<std::complex<double>(std::complex<double>)> evaluator;
  double singularity_abscissa = 0.0;
  LaplaceMethod method = LaplaceMethod::custom;
  double bandwidth = 0.0;

  std::complex<double> operator()(std::complex<double> eps) const { return evaluator(eps); }
};

/// de Hoog quotient-difference inversion.  For each time t the Bromwich
/// line sits at Re eps = sigma + damping / T with period T = period_factor * t
/// (or period_factor * max(times) when per_point is false), and the Fourier
/// series is truncated after 2 * terms + 1 samples and accelerated by the
/// continued fraction with the de Hoog remainder estimate.  The continued
/// fraction is evaluated at increasing orders up to `terms`; the first order
/// whose value matches the previous one within plateau_tolerance is returned,
/// and the difference is the error estimate.
///
/// Singularities at +-i w near the imaginary axis make the series
/// coefficients resonate around index w T / pi, which the continued fraction
/// cannot model from the leading coefficients alone.  The first
/// resolve_factor * bandwidth * T / pi terms are therefore summed directly and
/// only the smooth remainder is accelerated.
struct InversionSettings {
  int terms = 64;
  double resolve_factor = 2.0;
  double plateau_tolerance = 1e-11;
  double period_factor = 2.0;
  /// -ln(1e-12) / 2: bounds the aliasing error by ~1e-12 |f(t + 2T)|.
  double damping = 13.815510557964274;
  bool per_point = true;
  /// With per_point, consecutive times within this factor of the first one
  /// share one period (period_factor times the largest of them) and hence
  /// one set of samples.
  double group_span = 1.1;
  /// An error estimate above this is reported as non-convergence.
  double max_error = 1e-3;
};

struct InversionPoint {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// f(t) for t > 0 with period T; throws NumericalError on non-finite results
/// or error estimates above settings.max_error.
InversionPoint invert_laplace_at(const LaplaceSurvival& f, double t, double period, const InversionSettings& s = {});

/// Inverts f on times (all > 0).  Values are kept as computed unless they
/// leave [-1e-6, 1 + 1e-6]; those are clipped and listed in metadata["warnings"].
SurvivalCurve invert_laplace(const LaplaceSurvival& f, const std::vector<double>& times,
                             const InversionSettings& s = {});

}  // namespace zeno
