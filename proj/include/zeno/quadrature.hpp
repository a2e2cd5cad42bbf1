#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <type_traits>
#include <vector>

#include "zeno/error.hpp"

namespace zeno {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

template <typename Value>
struct QuadratureResult {
  Value value{};
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }

template <typename Value>
struct Panel {
  double a, b;
  Value value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename Value, typename F>
Panel<Value> gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const Value fc = f(c);
  Value kronrod = kKronrodWeights[7] * fc;
  Value gauss = kGaussWeights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * kKronrodNodes[j];
    const Value sum = f(c - x) + f(c + x);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= h;
  gauss *= h;
  return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b], bisecting the panel with the largest error
/// estimate until the total estimate meets max(abs_tol, rel_tol |I|).
/// `breakpoints` seed the initial partition (values outside (a, b) are ignored).
template <typename F>
auto integrate(F f, double a, double b, const QuadratureOptions& opt = {},
               const std::vector<double>& breakpoints = {}) {
  using Value = std::decay_t<decltype(f(a))>;
  QuadratureResult<Value> out;
  if (a == b) return out;
  if (!(b > a)) throw ValidationError("integrate: require a < b");

  std::vector<double> edges{a};
  for (double p : breakpoints)
    if (p > a && p < b) edges.push_back(p);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());

  std::priority_queue<detail::Panel<Value>> panels;
  Value total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto p = detail::gauss_kronrod_15<Value>(f, edges[i], edges[i + 1]);
    total += p.value;
    err += p.error;
    panels.push(p);
  }
  while (err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total))) {
    if (static_cast<int>(panels.size()) >= opt.max_intervals) {
      std::ostringstream os;
      os << "integrate: no convergence on [" << a << ", " << b << "] after " << panels.size()
         << " panels; achieved error estimate " << err;
      throw NumericalError(os.str());
    }
    const auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod_15<Value>(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15<Value>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // re-sum to shed the drift of the incremental updates
  Value sum{};
  double esum = 0.0;
  out.intervals = static_cast<int>(panels.size());
  while (!panels.empty()) {
    sum += panels.top().value;
    esum += panels.top().error;
    panels.pop();
  }
  out.value = sum;
  out.error = esum;
  return out;
}

}  // namespace zeno
