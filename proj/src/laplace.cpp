#include "zeno/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno {

using Complex = std::complex<double>;

std::string to_string(LaplaceMethod m) {
  switch (m) {
    case LaplaceMethod::supermatrix: return "supermatrix";
    case LaplaceMethod::scalar: return "scalar";
    case LaplaceMethod::poisson_closed: return "poisson-closed";
    case LaplaceMethod::anomalous_closed: return "anomalous-closed";
    case LaplaceMethod::relaxed_anomalous_closed: return "relaxed-anomalous-closed";
    case LaplaceMethod::custom: return "custom";
  }
  return "custom";
}

namespace {

// Continued fraction A_2M / B_2M of the power series sum a_k z^k, built by
// the quotient-difference algorithm, with the de Hoog remainder correction.
Complex accelerated_sum(const std::vector<Complex>& a, int m, Complex z) {
  const int n = 2 * m;
  std::vector<Complex> d(static_cast<std::size_t>(n) + 1);
  std::vector<Complex> e_prev(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Complex> q(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) q[i] = a[i + 1] / a[i];
  d[0] = a[0];
  std::vector<Complex> e(static_cast<std::size_t>(n) + 1);
  for (int r = 1; r <= m; ++r) {
    const int top = n - 2 * r;
    for (int i = 0; i <= top; ++i) e[i] = q[i + 1] - q[i] + e_prev[i + 1];
    d[2 * r - 1] = -q[0];
    d[2 * r] = -e[0];
    if (r < m)
      for (int i = 0; i <= top - 1; ++i) q[i] = q[i + 1] * e[i + 1] / e[i];
    std::swap(e, e_prev);
  }

  Complex a_prev2 = 0.0, b_prev2 = 1.0;  // A_{-1}, B_{-1}
  Complex a_prev1 = d[0], b_prev1 = 1.0;  // A_0, B_0
  for (int k = 1; k < n; ++k) {
    const Complex dz = d[k] * z;
    const Complex ak = a_prev1 + dz * a_prev2;
    const Complex bk = b_prev1 + dz * b_prev2;
    a_prev2 = a_prev1;
    b_prev2 = b_prev1;
    a_prev1 = ak;
    b_prev1 = bk;
  }
  // a_prev1 = A_{2M-1}, a_prev2 = A_{2M-2}
  const Complex h = 0.5 * (1.0 + (d[n - 1] - d[n]) * z);
  const Complex r = -h * (1.0 - std::sqrt(1.0 + d[n] * z / (h * h)));
  const Complex a_last = a_prev1 + r * a_prev2;
  const Complex b_last = b_prev1 + r * b_prev2;
  return a_last / b_last;
}

// Samples of f shared by every time point inverted with the same period.
struct SeriesSamples {
  double period = 0.0;
  double gamma = 0.0;
  std::vector<Complex> head;  // k = 0 .. K0, with the factor 1/2 on k = 0
  std::vector<Complex> tail;  // k = K0 + 1 .. K0 + 1 + 2 * terms
};

SeriesSamples sample_series(const LaplaceSurvival& f, double period, const InversionSettings& s) {
  if (s.terms < 12) throw ValidationError("invert_laplace: need at least 12 terms");
  if (!(s.resolve_factor >= 0.0) || !(f.bandwidth >= 0.0))
    throw ValidationError("invert_laplace: bandwidth and resolve_factor must be >= 0");
  const double pi = std::numbers::pi;
  const double direct = std::ceil(s.resolve_factor * f.bandwidth * period / pi);
  if (direct > 1e8) throw ValidationError("invert_laplace: bandwidth * period too large to resolve");
  const int k0 = static_cast<int>(direct);

  SeriesSamples out;
  out.period = period;
  out.gamma = f.singularity_abscissa + s.damping / period;
  out.head.resize(static_cast<std::size_t>(k0) + 1);
  out.head[0] = 0.5 * f(Complex(out.gamma, 0.0));
  for (int k = 1; k <= k0; ++k) out.head[k] = f(Complex(out.gamma, k * pi / period));
  out.tail.resize(2 * static_cast<std::size_t>(s.terms) + 1);
  for (std::size_t j = 0; j < out.tail.size(); ++j)
    out.tail[j] = f(Complex(out.gamma, static_cast<double>(k0 + 1 + j) * pi / period));
  return out;
}

InversionPoint evaluate_series(const SeriesSamples& a, double t, const InversionSettings& s) {
  const double pi = std::numbers::pi;
  const double theta = pi * t / a.period;
  const Complex z = std::polar(1.0, theta);

  // Phases by rotation, re-anchored periodically to stop the drift.
  Complex resolved = 0.0, phase = 1.0;
  for (std::size_t k = 0; k < a.head.size(); ++k) {
    if (k % 256 == 0) phase = std::polar(1.0, static_cast<double>(k) * theta);
    resolved += a.head[k] * phase;
    phase *= z;
  }
  const Complex shift = std::polar(1.0, static_cast<double>(a.head.size()) * theta);
  const double scale = std::exp(a.gamma * t) / a.period;

  // Raising the order beyond the point of convergence lets round-off in the
  // samples seed spurious poles, and those values can agree with each other
  // across orders.  Hence the first order that reproduces its predecessor wins.
  std::vector<int> orders;
  for (int m : {8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256})
    if (m < s.terms) orders.push_back(m);
  orders.push_back(s.terms);
  std::vector<double> values;
  for (int m : orders) values.push_back(scale * (resolved + shift * accelerated_sum(a.tail, m, z)).real());
  std::size_t pick = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = std::abs(values[i] - values[i - 1]);
    if (d <= s.plateau_tolerance * std::max(1.0, std::abs(values[i]))) {
      pick = i;
      best = d;
      break;
    }
    if (d < best) {
      best = d;
      pick = i;
    }
  }
  const double value = values[pick];
  InversionPoint out{value, best};
  if (!std::isfinite(out.value) || !std::isfinite(out.error_estimate) || out.error_estimate > s.max_error) {
    std::ostringstream os;
    os << "invert_laplace: no convergence at t = " << t << " (value " << value << ", error estimate "
       << out.error_estimate << ", T = " << a.period << ", abscissa " << a.gamma << ")";
    throw NumericalError(os.str());
  }
  return out;
}

}  // namespace

InversionPoint invert_laplace_at(const LaplaceSurvival& f, double t, double period, const InversionSettings& s) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("invert_laplace: times must be > 0");
  if (!(period >= t)) throw ValidationError("invert_laplace: period must be >= t");
  return evaluate_series(sample_series(f, period, s), t, s);
}

SurvivalCurve invert_laplace(const LaplaceSurvival& f, const std::vector<double>& times, const InversionSettings& s) {
  check_time_grid(times);
  SurvivalCurve curve;
  curve.provenance = Provenance::analytic;
  curve.times = times;
  curve.values.resize(times.size());
  curve.error_estimates.emplace(times.size());
  curve.metadata["laplace_method"] = to_string(f.method);
  const double t_max = times.empty() ? 0.0 : times.back();
  if (!(s.group_span >= 1.0)) throw ValidationError("invert_laplace: group_span must be >= 1");
  if (!times.empty() && !(times.front() > 0.0)) throw ValidationError("invert_laplace: times must be > 0");
  std::ostringstream warnings;
  for (std::size_t first = 0; first < times.size();) {
    std::size_t last = first;
    if (!s.per_point) last = times.size() - 1;
    while (last + 1 < times.size() && times[last + 1] <= s.group_span * times[first]) ++last;
    const double period = s.period_factor * (s.per_point ? times[last] : t_max);
    if (!(period >= times[last])) throw ValidationError("invert_laplace: period must be >= t");
    const SeriesSamples samples = sample_series(f, period, s);
    for (std::size_t i = first; i <= last; ++i) {
      auto p = evaluate_series(samples, times[i], s);
      if (p.value < -1e-6 || p.value > 1.0 + 1e-6) {
        warnings << "clipped " << p.value << " at t=" << times[i] << "; ";
        p.value = std::clamp(p.value, 0.0, 1.0);
      }
      curve.values[i] = p.value;
      (*curve.error_estimates)[i] = p.error_estimate;
    }
    first = last + 1;
  }
  if (!warnings.str().empty()) curve.metadata["warnings"] = warnings.str();
  return curve;
}

}  // namespace zeno
