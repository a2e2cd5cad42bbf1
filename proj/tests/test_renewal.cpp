#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "zeno/error.hpp"
#include "zeno/mittag_leffler.hpp"
#include "zeno/quadrature.hpp"
#include "zeno/renewal.hpp"

using namespace zeno;
using Complex = std::complex<double>;

namespace {

// Kolmogorov-Smirnov distance between a sample and a survival function S.
template <typename Survival>
double ks_distance(std::vector<double> xs, Survival survival) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = 1.0 - survival(xs[i]);
    d = std::max({d, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  return d;
}

std::vector<double> draws(const RenewalModel& m, std::uint64_t seed, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = sample_interval(m, rng);
  }
  return out;
}

double poisson_pmf(int n, double mean) { return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0)); }

}  // namespace

TEST_CASE("model validation") {
  CHECK_THROWS_AS(Poisson(0.0), ValidationError);
  CHECK_THROWS_AS(Equidistant(-1.0), ValidationError);
  CHECK_THROWS_AS(MittagLeffler(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(MittagLeffler(1.2, 1.0), ValidationError);
  CHECK_THROWS_AS(MittagLeffler(0.5, 0.0), ValidationError);
  CHECK(characteristic_rate(Equidistant(0.25)) == 4.0);
  CHECK(describe(MittagLeffler(0.5, 2.0)).find("mittag-leffler") != std::string::npos);
}

TEST_CASE("waiting-time density") {
  CHECK(pdf_W(Poisson(2.0), 0.0) == 2.0);
  CHECK(pdf_W(Poisson(2.0), -1.0) == 0.0);
  CHECK(pdf_W(MittagLeffler(1.0, 1.0), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(pdf_W(Equidistant(1.0), 0.5), ValidationError);

  // Heavy tail W ~ t^-(1 + alpha).
  const RenewalModel ml = MittagLeffler(0.5, 1.0);
  const double slope = (std::log(pdf_W(ml, 1e5)) - std::log(pdf_W(ml, 1e3))) / (std::log(1e5) - std::log(1e3));
  CHECK(std::abs(slope + 1.5) <= 0.02);
}

TEST_CASE("interval survival") {
  for (RenewalModel m : {RenewalModel(Poisson(2.0)), RenewalModel(Equidistant(1.0)), RenewalModel(MittagLeffler(0.3, 1.0))})
    CHECK(survival_P(m, 0.0) == 1.0);
  CHECK(survival_P(Equidistant(1.0), 0.999) == 1.0);
  CHECK(survival_P(Equidistant(1.0), 1.001) == 0.0);
  CHECK(survival_P(Poisson(2.0), 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(survival_P(MittagLeffler(0.5, 1.0), 1.0) == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-12));

  for (RenewalModel m : {RenewalModel(Poisson(0.7)), RenewalModel(MittagLeffler(0.4, 3.0)), RenewalModel(Equidistant(2.0))}) {
    double prev = 1.0;
    for (double t = 0.0; t < 50.0; t += 0.1) {
      const double p = survival_P(m, t);
      CHECK(p >= 0.0);
      CHECK(p <= prev);
      prev = p;
    }
  }
}

TEST_CASE("renewal function") {
  CHECK(std::abs(phi(Poisson(2.0), 1.0) - 0.5) < 1e-15);
  CHECK(std::abs(phi(Equidistant(1.0), 1.0) - (std::exp(1.0) - 1.0)) < 1e-15);
  CHECK(std::abs(phi(MittagLeffler(0.5, 4.0), 1.0) - 0.5) < 1e-15);
  CHECK_THROWS_AS(phi(MittagLeffler(0.5, 1.0), 0.0), ValidationError);
  CHECK_THROWS_AS(phi(Poisson(1.0), Complex(-0.1, 0.0)), ValidationError);

  const Complex z(0.3, 1.7);
  CHECK(std::abs(phi(MittagLeffler(1.0, 2.5), z) - phi(Poisson(2.5), z)) < 1e-15);
}

TEST_CASE("renewal function matches the Laplace transform of the density") {
  QuadratureOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-11;
  opt.max_intervals = 20000;
  for (RenewalModel m : {RenewalModel(Poisson(1.5)), RenewalModel(MittagLeffler(0.5, 1.0)), RenewalModel(MittagLeffler(0.8, 2.0))}) {
    const double w = characteristic_rate(m);
    const double alpha = std::holds_alternative<MittagLeffler>(m) ? std::get<MittagLeffler>(m).alpha() : 1.0;
    for (double scale : {0.1, 1.0, 10.0}) {
      const double eps = scale * w;
      // t = u^(1/alpha) / w absorbs the density's t^(alpha-1) singularity.
      auto f = [&](double u) {
        const double t = std::pow(u, 1.0 / alpha) / w;
        return std::exp(-eps * t) * pdf_W(m, t) * std::pow(u, 1.0 / alpha - 1.0) / (alpha * w);
      };
      const double upper = std::pow(w * 40.0 / eps, alpha);
      const double got = integrate(f, 0.0, upper, opt, {1.0}).value;
      const double want = 1.0 / (1.0 + phi(m, eps).real());
      CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("streams are reproducible and distinct") {
  auto a = make_stream(42, 7);
  auto b = make_stream(42, 7);
  auto c = make_stream(42, 8);
  auto d = make_stream(43, 7);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("samplers") {
  auto rng = make_stream(1, 0);
  for (int i = 0; i < 10; ++i) CHECK(sample_interval(Equidistant(0.7), rng) == 0.7);

  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (double x : draws(Poisson(2.0), 3, n)) {
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 0.5) <= 3.0 * se);

  const RenewalModel ml = MittagLeffler(0.5, 1.0);
  const double ks = ks_distance(draws(ml, 5, 100000), [&](double t) { return survival_P(ml, t); });
  CHECK(ks <= 0.005);

  const RenewalModel ml7 = MittagLeffler(0.7, 3.0);
  CHECK(ks_distance(draws(ml7, 6, 100000), [&](double t) { return survival_P(ml7, t); }) <= 0.005);

  CHECK(ks_distance(draws(MittagLeffler(1.0, 1.3), 8, 100000), [](double t) { return std::exp(-1.3 * t); }) <= 0.005);
}

TEST_CASE("count statistics by convolution") {
  const auto pc = count_probabilities(Poisson(1.0), 2.0);
  for (int k = 0; k <= 10; ++k) CHECK(std::abs(pc.probs[static_cast<std::size_t>(k)] - poisson_pmf(k, 2.0)) <= 1e-6);
  CHECK(std::abs(pc.total() - 1.0) <= 1e-6);
  CHECK(pc.probs[0] == doctest::Approx(survival_P(Poisson(1.0), 2.0)).epsilon(1e-15));

  for (RenewalModel m : {RenewalModel(MittagLeffler(0.5, 1.0)), RenewalModel(MittagLeffler(0.8, 2.0))}) {
    const auto c = count_probabilities(m, 3.0, 20);
    CHECK(std::abs(c.total() - 1.0) <= 1e-6);
    CHECK(c.probs[0] == doctest::Approx(survival_P(m, 3.0)).epsilon(1e-14));
    for (double p : c.probs) CHECK(p >= 0.0);
  }

  const auto eq = count_probabilities(Equidistant(1.0), 2.5);
  CHECK(eq.probs[2] == 1.0);
  CHECK(eq.total() == 1.0);
  for (std::size_t k = 0; k < eq.probs.size(); ++k)
    if (k != 2) CHECK(eq.probs[k] == 0.0);

  CHECK_THROWS_AS(count_probabilities(Poisson(1.0), 0.0), ValidationError);
  CHECK_THROWS_AS(count_probabilities(Poisson(1.0), 1.0, -1), ValidationError);
  CHECK_THROWS_AS(count_probabilities(Poisson(1.0), 1000.0), NumericalError);
}

TEST_CASE("count statistics by trajectories") {
  CountMcOptions mc;
  mc.n_trajectories = 100000;
  mc.master_seed = 12;
  const auto c = count_probabilities(Poisson(1.0), 2.0, 64, CountMethod::monte_carlo, mc);
  CHECK(c.total() == doctest::Approx(1.0).epsilon(1e-15));
  for (int k = 0; k <= 8; ++k) {
    const double want = poisson_pmf(k, 2.0);
    const double se = std::sqrt(want * (1 - want) / mc.n_trajectories);
    CHECK(std::abs(c.probs[static_cast<std::size_t>(k)] - want) <= 3.0 * se + 1e-12);
  }

  const RenewalModel ml = MittagLeffler(0.6, 1.0);
  const auto exact = count_probabilities(ml, 2.0, 20);
  const auto sim = count_probabilities(ml, 2.0, 20, CountMethod::monte_carlo, mc);
  for (int k = 0; k <= 5; ++k) {
    const double want = exact.probs[static_cast<std::size_t>(k)];
    const double se = std::sqrt(want * (1 - want) / mc.n_trajectories);
    CHECK(std::abs(sim.probs[static_cast<std::size_t>(k)] - want) <= 3.0 * se);
  }
}
