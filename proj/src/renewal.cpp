#include "zeno/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "zeno/error.hpp"
#include "zeno/mittag_leffler.hpp"

namespace zeno {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

// uniform on the open interval (0, 1)
double open_uniform(RandomStream& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x;
  do {
    x = u(rng);
  } while (x <= 0.0);
  return x;
}

// One-sided stable variable with E exp(-s S) = exp(-s^alpha), 0 < alpha < 1.
double positive_stable(double alpha, RandomStream& rng) {
  const double theta = std::numbers::pi * open_uniform(rng);
  const double e = -std::log(open_uniform(rng));
  const double a = std::sin(alpha * theta) / std::pow(std::sin(theta), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * theta) / e, (1.0 - alpha) / alpha);
  return a * b;
}

}  // namespace

Poisson::Poisson(double rate) : rate_(rate) {
  if (!positive_finite(rate)) throw ValidationError("Poisson: w_r must be > 0");
}

Equidistant::Equidistant(double period) : period_(period) {
  if (!positive_finite(period)) throw ValidationError("Equidistant: t_r must be > 0");
}

MittagLeffler::MittagLeffler(double alpha, double rate) : alpha_(alpha), rate_(rate) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("MittagLeffler: alpha must lie in (0, 1]");
  if (!positive_finite(rate)) throw ValidationError("MittagLeffler: w_r must be > 0");
}

double characteristic_rate(const RenewalModel& model) {
  return std::visit(overloaded{[](const Poisson& m) { return m.rate(); },
                               [](const Equidistant& m) { return 1.0 / m.period(); },
                               [](const MittagLeffler& m) { return m.rate(); }},
                    model);
}

std::string describe(const RenewalModel& model) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{[&](const Poisson& m) { os << "poisson(w_r=" << m.rate() << ")"; },
                        [&](const Equidistant& m) { os << "equidistant(t_r=" << m.period() << ")"; },
                        [&](const MittagLeffler& m) {
                          os << "mittag-leffler(alpha=" << m.alpha() << ",w_r=" << m.rate() << ")";
                        }},
             model);
  return os.str();
}

double pdf_W(const RenewalModel& model, double t) {
  if (t < 0.0) return 0.0;
  return std::visit(
      overloaded{[t](const Poisson& m) { return m.rate() * std::exp(-m.rate() * t); },
                 [](const Equidistant&) -> double {
                   throw ValidationError(
                       "pdf_W: the equidistant model is a delta distribution, not a density; "
                       "use survival_P or sample_interval");
                 },
                 [t](const MittagLeffler& m) { return m.rate() * mittag_leffler_density(m.alpha(), m.rate() * t); }},
      model);
}

double survival_P(const RenewalModel& model, double t) {
  if (t <= 0.0) return 1.0;
  return std::visit(overloaded{[t](const Poisson& m) { return std::exp(-m.rate() * t); },
                               [t](const Equidistant& m) { return t < m.period() ? 1.0 : 0.0; },
                               [t](const MittagLeffler& m) {
                                 return mittag_leffler_neg(m.alpha(), std::pow(m.rate() * t, m.alpha()));
                               }},
                    model);
}

std::complex<double> phi(const RenewalModel& model, std::complex<double> eps) {
  if (eps.real() < 0.0) throw ValidationError("phi: require Re(eps) >= 0");
  return std::visit(overloaded{[eps](const Poisson& m) { return eps / m.rate(); },
                               [eps](const Equidistant& m) { return std::exp(m.period() * eps) - 1.0; },
                               [eps](const MittagLeffler& m) -> std::complex<double> {
                                 if (m.alpha() == 1.0) return eps / m.rate();
                                 if (eps == 0.0) throw ValidationError("phi: eps = 0 is a branch point");
                                 return std::pow(eps / m.rate(), m.alpha());
                               }},
                    model);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream make_stream(std::uint64_t master_seed, std::uint64_t index) {
  return RandomStream(splitmix64(master_seed ^ splitmix64(index + 1)));
}

double sample_interval(const RenewalModel& model, RandomStream& rng) {
  return std::visit(overloaded{[&](const Poisson& m) { return -std::log(open_uniform(rng)) / m.rate(); },
                               [](const Equidistant& m) { return m.period(); },
                               [&](const MittagLeffler& m) {
                                 const double e = -std::log(open_uniform(rng));
                                 if (m.alpha() == 1.0) return e / m.rate();
                                 const double s = positive_stable(m.alpha(), rng);
                                 return std::pow(e, 1.0 / m.alpha()) * s / m.rate();
                               }},
                    model);
}

double CountDistribution::total() const {
  double sum = tail_mass;
  for (double p : probs) sum += p;
  return sum;
}

int count_events(const RenewalModel& model, double t, RandomStream& rng) {
  int n = 0;
  double clock = sample_interval(model, rng);
  while (clock <= t) {
    ++n;
    clock += sample_interval(model, rng);
  }
  return n;
}

namespace {

CountDistribution equidistant_counts(const Equidistant& m, double t, int n_max) {
  CountDistribution out;
  out.horizon = t;
  out.probs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double n = std::floor(t / m.period());
  if (n <= n_max)
    out.probs[static_cast<std::size_t>(n)] = 1.0;
  else
    out.tail_mass = 1.0;
  return out;
}

// Renewal-density convolution on a uniform grid.  F_n, the CDF of the n-th
// event time, obeys F_{n+1}(t) = int_0^t F_n(t - s) dF_1(s); both this and
// pi_n(t) = int_0^t P(t - s) dF_n(s) are evaluated as product-trapezoid sums
// over exact increments of the integrator, which keeps the integrable
// singularity of the Mittag-Leffler density at s = 0 out of the quadrature.
CountDistribution convolution_counts(const RenewalModel& model, double t, int n_max) {
  const double w = characteristic_rate(model);
  const double h_target = std::min(t, 1.0 / w) / 512.0;
  const auto steps = static_cast<std::size_t>(std::ceil(t / h_target));
  if (steps > 20000)
    throw NumericalError("count_probabilities: horizon spans more than 20000 grid steps; use the monte-carlo method");
  const double h = t / static_cast<double>(steps);
  const std::size_t n_nodes = steps + 1;

  std::vector<double> p_at(n_nodes);  // P(k h)
  for (std::size_t k = 0; k < n_nodes; ++k) p_at[k] = survival_P(model, static_cast<double>(k) * h);
  std::vector<double> dF1(steps);  // F_1((j+1)h) - F_1(j h)
  for (std::size_t j = 0; j < steps; ++j) dF1[j] = p_at[j] - p_at[j + 1];

  CountDistribution out;
  out.horizon = t;
  out.probs.resize(static_cast<std::size_t>(n_max) + 1);
  out.probs[0] = p_at[steps];

  std::vector<double> cdf(n_nodes);  // F_n on the grid
  for (std::size_t k = 0; k < n_nodes; ++k) cdf[k] = 1.0 - p_at[k];
  std::vector<double> next(n_nodes);

  for (int n = 1; n <= n_max + 1; ++n) {
    if (n <= n_max) {
      double pi = 0.0;
      for (std::size_t j = 0; j < steps; ++j)
        pi += (cdf[j + 1] - cdf[j]) * 0.5 * (p_at[steps - j] + p_at[steps - j - 1]);
      out.probs[static_cast<std::size_t>(n)] = pi;
    }
    if (n == n_max + 1) {
      out.tail_mass = cdf[steps];
      break;
    }
    next[0] = 0.0;
    for (std::size_t k = 1; k < n_nodes; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += dF1[j] * 0.5 * (cdf[k - j] + cdf[k - j - 1]);
      next[k] = acc;
    }
    std::swap(cdf, next);
  }
  return out;
}

CountDistribution monte_carlo_counts(const RenewalModel& model, double t, int n_max, const CountMcOptions& mc) {
  if (mc.n_trajectories < 2) throw ValidationError("count_probabilities: need at least 2 trajectories");
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(n_max) + 2, 0);
  for (std::uint64_t i = 0; i < mc.n_trajectories; ++i) {
    auto rng = make_stream(mc.master_seed, i);
    const int n = count_events(model, t, rng);
    ++hist[static_cast<std::size_t>(std::min(n, n_max + 1))];
  }
  const auto total = static_cast<double>(mc.n_trajectories);
  CountDistribution out;
  out.horizon = t;
  for (int n = 0; n <= n_max; ++n) {
    const double p = static_cast<double>(hist[static_cast<std::size_t>(n)]) / total;
    out.probs.push_back(p);
    out.stderrs.push_back(std::sqrt(p * (1.0 - p) / total));
  }
  out.tail_mass = static_cast<double>(hist.back()) / total;
  return out;
}

}  // namespace

CountDistribution count_probabilities(const RenewalModel& model, double t, int n_max, CountMethod method,
                                      const CountMcOptions& mc) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("count_probabilities: t must be > 0");
  if (n_max < 0) throw ValidationError("count_probabilities: n_max must be >= 0");
  if (const auto* eq = std::get_if<Equidistant>(&model)) return equidistant_counts(*eq, t, n_max);
  if (method == CountMethod::monte_carlo) return monte_carlo_counts(model, t, n_max, mc);
  return convolution_counts(model, t, n_max);
}

}  // namespace zeno
