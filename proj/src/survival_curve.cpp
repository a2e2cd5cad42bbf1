#include "zeno/survival_curve.hpp"

#include <cmath>

#include "zeno/error.hpp"

namespace zeno {

std::string to_string(Provenance p) { return p == Provenance::analytic ? "analytic" : "monte-carlo"; }

void check_time_grid(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
      throw ValidationError("time grid: values must be finite and >= 0");
    if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("time grid: values must be strictly increasing");
  }
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1) throw ValidationError("linear_grid: need at least one point");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw ValidationError("linear_grid: require hi > lo");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  out.back() = hi;
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0)) throw ValidationError("log_grid: require lo > 0");
  auto g = linear_grid(std::log(lo), std::log(hi), points);
  for (double& x : g) x = std::exp(x);
  g.front() = lo;
  if (points > 1) g.back() = hi;
  return g;
}

}  // namespace zeno
