#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "zeno/analytic.hpp"
#include "zeno/quadrature.hpp"

using namespace zeno;

namespace {

double rabi(double eps, double v, double t) {
  const double e = std::sqrt(eps * eps + v * v);
  const double s = std::sin(e * t);
  return 1.0 - v * v / (e * e) * s * s;
}

double max_rel(const SuperOp& a, const SuperOp& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

SystemModel uncoupled() {
  Eigen::MatrixXcd h = Eigen::Vector2cd(0.8, -0.8).asDiagonal();
  return SystemModel(h, 0);
}

const std::vector<RenewalModel> kRenewals = {Poisson(1.7), Equidistant(0.6), MittagLeffler(0.5, 2.0),
                                             MittagLeffler(1.0, 0.9)};

}  // namespace

TEST_CASE("Poisson propagator equals the resolvent") {
  for (auto m : {SystemModel::two_level(TwoLevelParams(0.0, 1.0)), SystemModel::two_level(TwoLevelParams(2.5, 1.0)),
                 SystemModel::two_level(TwoLevelParams(1.0, 1.0), RelaxationParams(0.3, 0.4))})
    for (Complex e : {Complex(0.1, 0.0), Complex(1.0, 2.0), Complex(10.0, -3.0)}) {
      const SuperOp a = averaged_propagator_laplace(e, m, Poisson(2.0));
      CHECK((a - poisson_resolvent(e, m, 2.0)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("short-time limit of the propagator") {
  auto m = SystemModel::two_level(TwoLevelParams(0.5, 1.0), RelaxationParams(0.2, 0.3));
  for (const auto& r : kRenewals) {
    // Heavy-tailed renewals leave a correction of order (eps / w_r)^-alpha.
    const double e = 1e12;
    const SuperOp u = averaged_propagator_laplace(e, m, r);
    CHECK(max_rel(u * e, SuperOp::Identity(4, 4)) <= 1e-4);
  }
}

TEST_CASE("equidistant propagator against the time-domain product") {
  const double eps = 0.5, v = 1.0, tr = 0.7;
  auto m = SystemModel::two_level(TwoLevelParams(eps, v));
  auto p = [&](double t) {
    const double n = std::floor(t / tr);
    return std::pow(rabi(eps, v, tr), n) * rabi(eps, v, t - n * tr);
  };
  QuadratureOptions opt;
  opt.abs_tol = 1e-13;
  opt.max_intervals = 20000;
  for (Complex e : {Complex(0.2, 0.0), Complex(1.0, 1.5), Complex(3.0, -4.0)}) {
    const double horizon = std::log(1e13) / e.real();
    std::vector<double> kinks;
    for (double k = tr; k < horizon; k += tr) kinks.push_back(k);
    const Complex want = integrate([&](double t) { return std::exp(-e * t) * p(t); }, 0.0, horizon, opt, kinks).value;
    CHECK(std::abs(survival_laplace(e, m, Equidistant(tr)) - want) <= 1e-6);
    CHECK(std::abs(survival_laplace(e, m, Equidistant(tr), SurvivalMethod::scalar) - want) <= 1e-6);
  }
  auto curve = equidistant_survival_curve(m, tr, linear_grid(0.0, 10.0, 101));
  for (std::size_t i = 0; i < curve.size(); ++i) CHECK(curve.values[i] == doctest::Approx(p(curve.times[i])).epsilon(1e-12));
}

TEST_CASE("uncoupled system survives") {
  const auto m = uncoupled();
  for (const auto& r : kRenewals)
    for (Complex e : {Complex(0.5, 0.0), Complex(2.0, 1.0)}) {
      CHECK(std::abs(survival_laplace(e, m, r) - 1.0 / e) <= 1e-12);
      CHECK(std::abs(survival_laplace(e, m, r, SurvivalMethod::scalar) - 1.0 / e) <= 1e-9);
    }
}

TEST_CASE("supermatrix and scalar routes agree") {
  for (double eb : {0.0, 1.0, 2.5}) {
    auto m = SystemModel::two_level(TwoLevelParams(eb, 1.0));
    for (const auto& r : kRenewals)
      for (double e : {0.1, 1.0, 10.0}) {
        if (std::holds_alternative<MittagLeffler>(r) && e < 1e-3 * characteristic_rate(r)) continue;
        const Complex a = survival_laplace(e, m, r);
        const Complex b = survival_laplace(e, m, r, SurvivalMethod::scalar);
        CHECK(std::abs(a - b) <= 1e-6 * std::abs(a));
      }
  }
  auto m = SystemModel::two_level(TwoLevelParams(1.0, 1.0));
  CHECK_THROWS_AS(survival_laplace(1e-4, m, MittagLeffler(0.5, 1.0), SurvivalMethod::scalar), ValidationError);
  CHECK_THROWS_AS(survival_laplace(Complex(-0.1, 0.0), m, Poisson(1.0)), ValidationError);
}

TEST_CASE("Poisson closed form") {
  for (double eb : {0.0, 1.0, 2.5})
    for (std::optional<RelaxationParams> r : {std::optional<RelaxationParams>{}, std::optional(RelaxationParams(0.1, 0.2))}) {
      const TwoLevelParams p(eb, 1.0);
      auto m = SystemModel::two_level(p, r);
      for (Complex e : {Complex(0.1, 0.0), Complex(1.0, 0.5), Complex(10.0, -7.0)})
        CHECK(std::abs(survival_laplace(e, m, Poisson(2.0)) - survival_laplace_poisson(e, p, r, 2.0)) <= 1e-10);
    }

  const TwoLevelParams zero(0.0, 1.0);
  CHECK(survival_laplace_poisson(0.0, zero, {}, std::sqrt(2.0)).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(survival_laplace_poisson(0.7, TwoLevelParams(0.3, 1e-8), {}, 2.0) - 1.0 / 0.7) <= 1e-12);

  // eps = 0 with relaxation: 1/w_r + 1/(w_d + 2 w_rp v^2 / (w_rp^2 + 4 eps^2)).
  const TwoLevelParams p(1.2, 0.9);
  const RelaxationParams r(0.3, 0.5);
  const double w_rp = 2.0 + 0.5;
  const double rate = 0.3 + 2.0 * w_rp * 0.81 / (w_rp * w_rp + 4.0 * 1.44);
  CHECK(survival_laplace_poisson(0.0, p, r, 2.0).real() == doctest::Approx(0.5 + 1.0 / rate).epsilon(1e-14));
}

TEST_CASE("anomalous large-rate limit") {
  const TwoLevelParams p(0.53, 1.0);
  for (Complex e : {Complex(0.3, 0.0), Complex(1.0, 2.0)})
    CHECK(std::abs(survival_laplace_anomalous_limit(e, p, 1.0) - 1.0 / e) <= 1e-14);
  CHECK(std::abs(survival_laplace_anomalous_limit(1e3, p, 0.4) * 1e3 - 1.0) <= 1e-3);

  auto m = SystemModel::two_level(p);
  for (double a : {0.3, 0.5, 0.9})
    for (Complex e : {Complex(0.2, 0.0), Complex(1.0, 0.7), Complex(3.0, -2.0)}) {
      const Complex lim = survival_laplace_anomalous_limit(e, p, a);
      const double far = std::abs(lim - survival_laplace(e, m, MittagLeffler(a, 1e6)));
      const double near = std::abs(lim - survival_laplace(e, m, MittagLeffler(a, 1e9)));
      CHECK(near <= 1e-3 * std::abs(lim));
      CHECK(near < far);
    }
  CHECK_THROWS_AS(survival_laplace_anomalous_limit(0.0, p, 0.5), ValidationError);
  CHECK_THROWS_AS(survival_laplace_anomalous_limit(1.0, p, 1.5), ValidationError);
}

TEST_CASE("relaxed anomalous closed form") {
  CHECK(survival_laplace_relaxed_anomalous(1.0, 1.0, 1.0).real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(survival_laplace_relaxed_anomalous(1.0, 0.5, 1.0).real() ==
        doctest::Approx((1.0 + 1.0 / std::sqrt(3.0)) / (1.0 + std::sqrt(3.0))).epsilon(1e-14));
  CHECK(std::abs(survival_laplace_relaxed_anomalous(1e8, 0.6, 1.0) * 1e8 - 1.0) <= 1e-4);
  CHECK_THROWS_AS(survival_laplace_relaxed_anomalous(0.0, 0.5, 1.0), ValidationError);

  // At alpha = 1 the kinetics follow the balance equations with state 2
  // absorbed by the measurement: dp1/dt = -w p1.  Integrated by RK4.
  const double w = 0.8;
  auto curve = survival_curve(relaxed_anomalous_survival(1.0, w), linear_grid(0.0, 8.0, 81));
  double p1 = 1.0, t = 0.0;
  const double h = 1e-3;
  std::size_t next = 0;
  while (next < curve.size()) {
    if (std::abs(t - curve.times[next]) < h / 2) {
      CHECK(std::abs(curve.values[next] - p1) <= 1e-8);
      ++next;
    }
    const double k1 = -w * p1, k2 = -w * (p1 + h / 2 * k1), k3 = -w * (p1 + h / 2 * k2), k4 = -w * (p1 + h * k3);
    p1 += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
}

TEST_CASE("transform invariants on the real axis") {
  auto dyn = SystemModel::two_level(TwoLevelParams(0.7, 1.0));
  auto rel = SystemModel::two_level(TwoLevelParams(0.7, 1.0), RelaxationParams(0.5, 0.6));
  for (const auto& m : {dyn, rel})
    for (const auto& r : kRenewals) {
      for (double e : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const Complex f = survival_laplace(e, m, r);
        CHECK(std::abs(f.imag()) <= 1e-12 * std::abs(f));
        CHECK(f.real() > 0.0);
        CHECK(e * f.real() <= 1.0 + 1e-9);
      }
      const double big = 1e6 * std::max(characteristic_rate(r), 1.3);
      CHECK(std::abs(big * survival_laplace(big, m, r).real() - 1.0) <= 1e-4);
    }
}

TEST_CASE("inverted survival curves") {
  const TwoLevelParams p(1.0, 1.0);
  auto m = SystemModel::two_level(p);
  for (const auto& f : {supermatrix_survival(m, Poisson(2.0)), poisson_survival(p, {}, 2.0),
                        supermatrix_survival(m, MittagLeffler(0.5, 1.0)), anomalous_limit_survival(p, 0.3)}) {
    auto c = survival_curve(f, linear_grid(0.0, 20.0, 81));
    CHECK(c.values[0] == doctest::Approx(1.0).epsilon(1e-6));
    for (double v : c.values) {
      CHECK(v >= -1e-6);
      CHECK(v <= 1.0 + 1e-6);
    }
    CHECK(c.metadata.count("warnings") == 0);
  }
  // Time-domain resolvent for Poisson: <11| exp(-(L + w_r Q) t) |11>.
  const auto pr = projector_superops(0, 2);
  const SuperOp k = generator(m) + 2.0 * pr.q;
  auto c = survival_curve(supermatrix_survival(m, Poisson(2.0)), linear_grid(0.0, 20.0, 41));
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.values[i] - superop_exp(k, c.times[i])(0, 0).real()) <= 1e-8);
}

TEST_CASE("long-lived Rabi oscillations under rare measurements") {
  for (double eb : {1.0, 2.5}) {
    auto m = SystemModel::two_level(TwoLevelParams(eb, 1.0));
    const SuperOp k = generator(m) + 0.05 * projector_superops(0, 2).q;
    for (const auto& f : {supermatrix_survival(m, Poisson(0.05)), poisson_survival(TwoLevelParams(eb, 1.0), {}, 0.05)}) {
      auto c = survival_curve(f, linear_grid(0.0, 100.0, 201));
      for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(std::abs(c.values[i] - superop_exp(k, c.times[i])(0, 0).real()) <= 1e-8);
    }
  }
}

TEST_CASE("derived rates") {
  auto d0 = derived_rates(TwoLevelParams(0.0, 1.0), {}, 1.0);
  CHECK(d0.w_rm_bar == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(d0.w_d0_bar.has_value());
  CHECK_FALSE(d0.w_d0_tilde.has_value());
  CHECK_FALSE(d0.w_z.has_value());

  // w0_bar(w_r) is largest at w_r = 2 eps, where it equals v^2 / (2 eps).
  const TwoLevelParams one(1.0, 1.0);
  CHECK(derived_rates(one, {}, 2.0).w0_bar == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(derived_rates(one, {}, 1.9).w0_bar < 0.5);
  CHECK(derived_rates(one, {}, 2.1).w0_bar < 0.5);

  CHECK(derived_rates(TwoLevelParams(2.5, 1.0), {}, 1.0).w_rm_bar == doctest::Approx(std::sqrt(27.0)).epsilon(1e-15));

  auto dz = derived_rates(TwoLevelParams(0.53, 1.0), {}, 1.0, 0.97);
  CHECK(*dz.w_z == doctest::Approx(0.5 * M_PI * 0.03 * std::sqrt(1.2809)).epsilon(1e-12));
  CHECK(*dz.w_z == doctest::Approx(0.0533).epsilon(1e-3));

  auto dr = derived_rates(TwoLevelParams(0.5, 2.0), RelaxationParams(0.1, 0.2), 10.0);
  CHECK(*dr.w_d0_bar == doctest::Approx(0.1 + 2 * 10.2 * 4.0 / (10.2 * 10.2 + 1.0)).epsilon(1e-15));
  CHECK(*dr.w_d0_tilde == doctest::Approx(0.1 + 2 * 4.0 * 0.2 / (0.04 + 1.0)).epsilon(1e-15));
  CHECK_FALSE(derived_rates(TwoLevelParams(0.0, 1.0), RelaxationParams(0.0, 0.0), 1.0).w_d0_tilde.has_value());
}

TEST_CASE("Zeno time") {
  const TwoLevelParams zero(0.0, 1.0);
  CHECK(zeno_time_poisson(zero, {}, std::sqrt(2.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  auto m = SystemModel::two_level(zero);
  CHECK(zeno_time(m, Poisson(std::sqrt(2.0))).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));

  // w_r -> 0: p1_bar (1 - p1_bar)^-1 / w_r with p1_bar = 1/2.
  CHECK(zeno_time_poisson(zero, {}, 1e-3) == doctest::Approx(1e3).epsilon(0.02));
  // w_r -> infinity: w_r / (2 v^2).
  CHECK(zeno_time_poisson(zero, {}, 1e3) == doctest::Approx(500.0).epsilon(0.01));

  for (double eb : {0.3, 1.0, 2.5}) {
    const TwoLevelParams p(eb, 1.0);
    const RelaxationParams r(0.2, 0.3);
    CHECK(zeno_time(SystemModel::two_level(p), Poisson(1.5)).value ==
          doctest::Approx(zeno_time_poisson(p, {}, 1.5)).epsilon(1e-6));
    CHECK(zeno_time(SystemModel::two_level(p, r), Poisson(1.5)).value ==
          doctest::Approx(zeno_time_poisson(p, r, 1.5)).epsilon(1e-6));
  }

  // Equidistant: integral of the product formula, a geometric series of blocks.
  for (double tr : {0.2, 0.5, 1.3}) {
    const double eps = 0.6, v = 1.0;
    const double block = integrate([&](double s) { return rabi(eps, v, s); }, 0.0, tr).value;
    const double want = block / (1.0 - rabi(eps, v, tr));
    const auto got = zeno_time(SystemModel::two_level(TwoLevelParams(eps, v)), Equidistant(tr));
    CHECK(got.value == doctest::Approx(want).epsilon(1e-6));
    CHECK(got.spread <= 5e-3);
  }

  CHECK_THROWS_AS(zeno_time(m, MittagLeffler(0.5, 1.0)), ValidationError);
}

TEST_CASE("Zeno-time scan") {
  for (double eb : {0.0, 1.0, 2.5}) {
    const TwoLevelParams p(eb, 1.0);
    auto scan = zeno_scan(p, {}, log_grid(1e-2, 1e2, 200));
    const double step = std::pow(1e4, 1.0 / 199);
    const double want = std::sqrt(2.0 + 4.0 * eb * eb);
    CHECK(scan.argmin_w_r / want < step);
    CHECK(want / scan.argmin_w_r < step);
    const double lowest = *std::min_element(scan.t_Z_values.begin(), scan.t_Z_values.end());
    CHECK(scan.t_Z_values.front() > 5 * lowest);
    CHECK(scan.t_Z_values.back() > 5 * lowest);
    for (double t : scan.t_Z_values) CHECK(t > 0.0);
  }
  CHECK_THROWS_AS(zeno_scan(TwoLevelParams(0.0, 1.0), {}, {}), ValidationError);
}

TEST_CASE("tail exponent fit") {
  SurvivalCurve pure;
  pure.times = log_grid(1.0, 1e4, 400);
  for (double t : pure.times) pure.values.push_back(std::pow(t, -0.5));
  auto f = tail_exponent_fit(pure, 10.0, 1e4, 1.0);
  CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(f.amplitude == doctest::Approx(1.0).epsilon(1e-6));

  SurvivalCurve osc;
  osc.times = block_sampling_grid(1e2, 1e4, 1.0, 300);
  for (double t : osc.times) osc.values.push_back((1.0 + 0.3 * std::cos(2.0 * t)) * std::pow(t, -0.3));
  CHECK(tail_exponent_fit(osc, 1e2, 1e4, 1.0).exponent == doctest::Approx(0.3).epsilon(0.01 / 0.3));

  CHECK_THROWS_AS(tail_exponent_fit(osc, 1e2, 1e2 + 5.0, 1.0), ValidationError);
  SurvivalCurve neg = pure;
  neg.values[300] = 0.0;
  CHECK_THROWS_AS(tail_exponent_fit(neg, 10.0, 1e4, 1.0), ValidationError);
}

TEST_CASE("exponential rate fit") {
  SurvivalCurve c;
  c.times = linear_grid(0.0, 40.0, 4001);
  for (double t : c.times) c.values.push_back(0.7 * std::exp(-0.15 * t) * (1.0 + 0.2 * std::cos(3.0 * t)));
  auto f = exponential_rate_fit(c, 5.0, 35.0, 1.5);
  CHECK(f.rate == doctest::Approx(0.15).epsilon(1e-3));

  SurvivalCurve plain;
  plain.times = linear_grid(0.0, 10.0, 50);
  for (double t : plain.times) plain.values.push_back(0.5 * std::exp(-0.5 * t));
  auto g = exponential_rate_fit(plain, 1.0, 5.0);
  CHECK(g.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.amplitude == doctest::Approx(0.5).epsilon(1e-12));
}
