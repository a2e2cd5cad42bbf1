#include "zeno/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "zeno/error.hpp"
#include "zeno/mittag_leffler.hpp"
#include "zeno/quadrature.hpp"

namespace zeno {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_right_half_plane(Complex eps, const char* where) {
  if (!(eps.real() > 0.0) || !std::isfinite(eps.real()) || !std::isfinite(eps.imag())) {
    std::ostringstream os;
    os << where << ": require Re eps > 0 (got " << eps << ")";
    throw ValidationError(os.str());
  }
}

// Largest oscillation frequency of the free evolution.
double generator_bandwidth(const SystemModel& model) {
  const Eigen::ComplexEigenSolver<SuperOp> es(generator(model), false);
  return es.eigenvalues().imag().cwiseAbs().maxCoeff();
}

SuperOp checked_inverse(const SuperOp& m, const char* what) {
  Eigen::PartialPivLU<SuperOp> lu(m);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << what << " is numerically singular (rcond " << rc << ")";
    throw NumericalError(os.str());
  }
  return lu.inverse();
}

// p~ = P~_p / (1 - W~_p), with P~_p and W~_p the transforms of P(t) p_1(t) and W(t) p_1(t).
Complex scalar_route(Complex eps, const SystemModel& model, const RenewalModel& renewal) {
  const FreeSurvival p1(model);
  QuadratureOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-11;
  opt.max_intervals = 20000;
  // Truncate where the damped integrand has fallen below 1e-13.
  const double cut = std::log(1e13);

  return std::visit(
      Overloaded{
          [&](const Poisson& m) {
            const double w = m.rate();
            const double t_q = cut / (w + eps.real());
            auto fp = [&](double t) { return std::exp(-(eps + w) * t) * p1(t); };
            const Complex pp = integrate(fp, 0.0, t_q, opt).value;
            const Complex wp = w * pp;  // W = w P for the exponential law
            return pp / (1.0 - wp);
          },
          [&](const Equidistant& m) {
            const double tr = m.period();
            auto fp = [&](double t) { return std::exp(-eps * t) * p1(t); };
            const Complex pp = integrate(fp, 0.0, tr, opt).value;
            const Complex wp = std::exp(-eps * tr) * p1(tr);
            return pp / (1.0 - wp);
          },
          [&](const MittagLeffler& m) {
            const double a = m.alpha();
            const double w = m.rate();
            if (eps.real() < 1e-3 * w) {
              std::ostringstream os;
              os << "scalar route: Mittag-Leffler quadrature needs Re eps >= 1e-3 w_r (got " << eps.real() << ")";
              throw ValidationError(os.str());
            }
            const double t_q = cut / eps.real();
            // t = u^{1/alpha} / w flattens the t^{alpha-1} density singularity.
            const double u_max = std::pow(w * t_q, a);
            auto jac = [&](double u) { return std::pow(u, 1.0 / a - 1.0) / (a * w); };
            auto fp = [&](double u) {
              const double t = std::pow(u, 1.0 / a) / w;
              return std::exp(-eps * t) * mittag_leffler_neg(a, u) * p1(t) * jac(u);
            };
            auto fw = [&](double u) {
              const double t = std::pow(u, 1.0 / a) / w;
              // W(t) dt = w f_alpha(w t) dt
              return std::exp(-eps * t) * w * mittag_leffler_density(a, w * t) * p1(t) * jac(u);
            };
            std::vector<double> bps{1.0};
            const Complex pp = integrate(fp, 0.0, u_max, opt, bps).value;
            const Complex wp = integrate(fw, 0.0, u_max, opt, bps).value;
            return pp / (1.0 - wp);
          },
      },
      renewal);
}

double hamiltonian_scale(const SystemModel& model) { return model.hamiltonian().cwiseAbs().maxCoeff(); }

}  // namespace

AveragedPropagator::AveragedPropagator(const SystemModel& model, const RenewalModel& renewal)
    : generator_(generator(model)),
      projectors_(projector_superops(model.measured_index(), model.dim())),
      renewal_(renewal),
      index_(model.measured_liouville_index()) {
  if (const auto* ml = std::get_if<MittagLeffler>(&renewal_); ml && ml->alpha() < 1.0)
    spectral_ = spectral_decomposition(generator_);
  if (const auto* eq = std::get_if<Equidistant>(&renewal_)) decay_ = superop_exp(generator_, eq->period());
}

SuperOp AveragedPropagator::phi_of_omega(Complex eps) const {
  const auto n = generator_.rows();
  const SuperOp id = SuperOp::Identity(n, n);
  const SuperOp omega = eps * id + generator_;
  return std::visit(Overloaded{
                        [&](const Poisson& m) -> SuperOp { return omega / m.rate(); },
                        [&](const Equidistant& m) -> SuperOp {
                          const SuperOp growth = superop_exp(-generator_, m.period());
                          return std::exp(eps * m.period()) * growth - id;
                        },
                        [&](const MittagLeffler& m) -> SuperOp {
                          if (!spectral_) return omega / m.rate();
                          const double w = m.rate();
                          const double a = m.alpha();
                          return apply_spectral_function(
                              *spectral_, [&](Complex z) { return principal_power(z / w, a); }, eps);
                        },
                    },
                    renewal_);
}

SuperOp AveragedPropagator::operator()(Complex eps) const {
  require_right_half_plane(eps, "averaged propagator");
  const auto n = generator_.rows();
  const SuperOp id = SuperOp::Identity(n, n);
  const SuperOp omega = eps * id + generator_;

  if (const auto* eq = std::get_if<Equidistant>(&renewal_)) {
    // With W = exp(-t_r Omega) the product Phi (Phi + Q)^-1 equals
    // (1 - W)(1 - P W)^-1, which stays bounded for large Re eps.
    const SuperOp w = std::exp(-eps * eq->period()) * decay_;
    const SuperOp inner = checked_inverse(id - projectors_.p * w, "1 - P W(Omega)");
    return omega.partialPivLu().solve(((id - w) * inner).eval());
  }

  const SuperOp phi_m = phi_of_omega(eps);
  const SuperOp inner = checked_inverse(phi_m + projectors_.q, "Phi(Omega) + Q");
  Eigen::PartialPivLU<SuperOp> lu(omega);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("averaged propagator: eps + L is numerically singular");
  return lu.solve((phi_m * inner).eval());
}

Complex AveragedPropagator::survival(Complex eps) const { return (*this)(eps)(index_, index_); }

SuperOp averaged_propagator_laplace(Complex eps, const SystemModel& model, const RenewalModel& renewal) {
  return AveragedPropagator(model, renewal)(eps);
}

SuperOp poisson_resolvent(Complex eps, const SystemModel& model, double w_r) {
  if (!(w_r > 0.0)) throw ValidationError("poisson_resolvent: w_r must be > 0");
  const SuperOp l = generator(model);
  const auto pr = projector_superops(model.measured_index(), model.dim());
  const SuperOp m = eps * SuperOp::Identity(l.rows(), l.cols()) + l + w_r * pr.q;
  return checked_inverse(m, "eps + L + w_r Q");
}

Complex survival_laplace(Complex eps, const SystemModel& model, const RenewalModel& renewal, SurvivalMethod method) {
  if (method == SurvivalMethod::supermatrix) return AveragedPropagator(model, renewal).survival(eps);
  require_right_half_plane(eps, "scalar route");
  return scalar_route(eps, model, renewal);
}

Complex survival_laplace_poisson(Complex eps, const TwoLevelParams& p, const std::optional<RelaxationParams>& r,
                                 double w_r) {
  if (!(w_r > 0.0)) throw ValidationError("survival_laplace_poisson: w_r must be > 0");
  const double w_d = r ? r->w_d() : 0.0;
  const double w_rp = w_r + (r ? r->w_p() : 0.0);
  const double v = p.v();
  const double e = p.epsilon();
  const Complex s = eps + w_rp;
  const Complex w_bar = w_d + 2.0 * s * v * v / (s * s + 4.0 * e * e);
  const Complex den = eps * eps + eps * (w_r + 2.0 * w_bar) + w_r * w_bar;
  if (std::abs(den) == 0.0) throw NumericalError("survival_laplace_poisson: pole at eps");
  return (eps + w_r + w_bar) / den;
}

Complex survival_laplace_anomalous_limit(Complex eps, const TwoLevelParams& p, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("anomalous limit: alpha must lie in (0, 1]");
  require_right_half_plane(eps, "anomalous limit");
  const double eb2 = p.epsilon_bar() * p.epsilon_bar();
  const Complex c(0.0, 2.0 * p.energy());
  auto omega_bar = [&](double beta) { return 0.5 * (std::pow(eps + c, beta) + std::pow(eps - c, beta)); };
  const double g = 2.0 * eb2 + 1.0;
  return (g * std::pow(eps, alpha - 1.0) + omega_bar(alpha - 1.0)) / (g * std::pow(eps, alpha) + omega_bar(alpha));
}

Complex survival_laplace_relaxed_anomalous(Complex eps, double alpha, double w_tilde_d0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("relaxed anomalous limit: alpha must lie in (0, 1]");
  if (!(w_tilde_d0 >= 0.0)) throw ValidationError("relaxed anomalous limit: rate must be >= 0");
  require_right_half_plane(eps, "relaxed anomalous limit");
  const Complex b = eps + 2.0 * w_tilde_d0;
  return (std::pow(eps, alpha - 1.0) + std::pow(b, alpha - 1.0)) / (std::pow(eps, alpha) + std::pow(b, alpha));
}

LaplaceSurvival supermatrix_survival(const SystemModel& model, const RenewalModel& renewal) {
  auto prop = std::make_shared<const AveragedPropagator>(model, renewal);
  return {[prop](Complex eps) { return prop->survival(eps); }, 0.0, LaplaceMethod::supermatrix,
          generator_bandwidth(model)};
}

LaplaceSurvival scalar_survival(const SystemModel& model, const RenewalModel& renewal) {
  return {[model, renewal](Complex eps) { return survival_laplace(eps, model, renewal, SurvivalMethod::scalar); },
          0.0, LaplaceMethod::scalar, generator_bandwidth(model)};
}

LaplaceSurvival poisson_survival(const TwoLevelParams& p, const std::optional<RelaxationParams>& r, double w_r) {
  if (!(w_r > 0.0)) throw ValidationError("poisson_survival: w_r must be > 0");
  return {[p, r, w_r](Complex eps) { return survival_laplace_poisson(eps, p, r, w_r); }, 0.0,
          LaplaceMethod::poisson_closed, 2.0 * p.energy()};
}

LaplaceSurvival anomalous_limit_survival(const TwoLevelParams& p, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("anomalous limit: alpha must lie in (0, 1]");
  return {[p, alpha](Complex eps) { return survival_laplace_anomalous_limit(eps, p, alpha); }, 0.0,
          LaplaceMethod::anomalous_closed, 2.0 * p.energy()};
}

LaplaceSurvival relaxed_anomalous_survival(double alpha, double w_tilde_d0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("relaxed anomalous limit: alpha must lie in (0, 1]");
  return {[alpha, w_tilde_d0](Complex eps) { return survival_laplace_relaxed_anomalous(eps, alpha, w_tilde_d0); },
          0.0, LaplaceMethod::relaxed_anomalous_closed};
}

SurvivalCurve survival_curve(const LaplaceSurvival& f, const std::vector<double>& times,
                             const InversionSettings& settings) {
  check_time_grid(times);
  const bool has_zero = !times.empty() && times.front() == 0.0;
  std::vector<double> positive(times.begin() + (has_zero ? 1 : 0), times.end());
  SurvivalCurve curve = invert_laplace(f, positive, settings);
  if (has_zero) {
    constexpr double big = 1e12;
    const double p0 = (big * f(Complex(big, 0.0))).real();
    curve.times.insert(curve.times.begin(), 0.0);
    curve.values.insert(curve.values.begin(), std::clamp(p0, 0.0, 1.0));
    curve.error_estimates->insert(curve.error_estimates->begin(), std::abs(p0 - std::clamp(p0, 0.0, 1.0)));
  }
  return curve;
}

SurvivalCurve equidistant_survival_curve(const SystemModel& model, double t_r, const std::vector<double>& times) {
  if (!(t_r > 0.0)) throw ValidationError("equidistant_survival_curve: t_r must be > 0");
  check_time_grid(times);
  const FreeSurvival p1(model);
  const double step = p1(t_r);
  SurvivalCurve curve;
  curve.provenance = Provenance::analytic;
  curve.times = times;
  curve.values.reserve(times.size());
  for (double t : times) {
    const double n = std::floor(t / t_r);
    curve.values.push_back(p1(t - n * t_r) * std::pow(step, n));
  }
  curve.error_estimates.emplace(times.size(), 0.0);
  curve.metadata["laplace_method"] = "time-domain-product";
  return curve;
}

DerivedRates derived_rates(const TwoLevelParams& p, const std::optional<RelaxationParams>& r, double w_r,
                           std::optional<double> alpha) {
  if (!(w_r > 0.0)) throw ValidationError("derived_rates: w_r must be > 0");
  const double v2 = p.v() * p.v();
  const double e2 = p.epsilon() * p.epsilon();
  const double eb2 = p.epsilon_bar() * p.epsilon_bar();
  DerivedRates out{};
  out.w0_bar = 2.0 * w_r * v2 / (w_r * w_r + 4.0 * e2);
  out.w_rm_bar = std::sqrt(2.0 + 4.0 * eb2);
  if (r) {
    const double w_rp = w_r + r->w_p();
    out.w_d0_bar = r->w_d() + 2.0 * w_rp * v2 / (w_rp * w_rp + 4.0 * e2);
    const double den = r->w_p() * r->w_p() + 4.0 * e2;
    if (den > 0.0) out.w_d0_tilde = r->w_d() + 2.0 * v2 * r->w_p() / den;
  }
  if (alpha) {
    if (!(*alpha > 0.0 && *alpha <= 1.0)) throw ValidationError("derived_rates: alpha must lie in (0, 1]");
    out.w_z = 0.5 * std::numbers::pi * (1.0 - *alpha) * p.v() * std::sqrt(eb2 + 1.0);
  }
  return out;
}

double zeno_time_poisson(const TwoLevelParams& p, const std::optional<RelaxationParams>& r, double w_r) {
  const auto d = derived_rates(p, r, w_r);
  const double rate = r ? *d.w_d0_bar : d.w0_bar;
  return 1.0 / w_r + 1.0 / rate;
}

ZenoTimeEstimate zeno_time(const SystemModel& model, const RenewalModel& renewal, std::optional<double> scale) {
  if (std::holds_alternative<MittagLeffler>(renewal))
    throw ValidationError("zeno_time: mean survival time diverges for Mittag-Leffler measurements");
  const double s = scale ? *scale : hamiltonian_scale(model);
  if (!(s > 0.0)) throw ValidationError("zeno_time: scale must be > 0");
  const AveragedPropagator prop(model, renewal);
  const double h = 1e-4 * s;
  const double f1 = prop.survival(h).real();
  const double f2 = prop.survival(h / 2).real();
  const double f4 = prop.survival(h / 4).real();
  const double r1 = 2.0 * f2 - f1;
  const double r2 = 2.0 * f4 - f2;
  const double value = (4.0 * r2 - r1) / 3.0;
  ZenoTimeEstimate out{value, std::abs(r2 - r1) / std::abs(value)};
  if (!std::isfinite(value) || out.spread > 5e-3) {
    std::ostringstream os;
    os << "zeno_time: extrapolation inconsistent (values " << f1 << ", " << f2 << ", " << f4 << ")";
    throw NumericalError(os.str());
  }
  return out;
}

ZenoScan zeno_scan(const TwoLevelParams& p, const std::optional<RelaxationParams>& r,
                   const std::vector<double>& w_r_grid) {
  if (w_r_grid.empty()) throw ValidationError("zeno_scan: empty w_r grid");
  ZenoScan out;
  out.w_r_grid = w_r_grid;
  out.t_Z_values.reserve(w_r_grid.size());
  for (double w : w_r_grid) out.t_Z_values.push_back(zeno_time_poisson(p, r, w));
  const auto it = std::min_element(out.t_Z_values.begin(), out.t_Z_values.end());
  out.argmin_w_r = w_r_grid[static_cast<std::size_t>(it - out.t_Z_values.begin())];
  return out;
}

namespace {

enum class FitShape { power, exponential };

struct LineFit {
  double slope, intercept, residual;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit: abscissae are degenerate");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - (icpt + slope * x[i]);
    ss += d * d;
  }
  return {slope, icpt, std::sqrt(ss / n)};
}

struct BlockFit {
  double decay, amplitude, residual;
  int blocks;
};

// Averages the curve over blocks of the given width (one sample per block when
// width <= 0) and fits a straight line to log p.  The abscissa of each block
// is the point where the fitted model equals its own block average, refined by
// fixed-point iteration, so a pure power law or exponential is reproduced exactly.
BlockFit block_fit(const SurvivalCurve& c, double t_lo, double t_hi, double width, FitShape shape) {
  if (!(t_hi > t_lo) || !(t_lo >= 0.0)) throw ValidationError("fit: require 0 <= t_lo < t_hi");
  if (shape == FitShape::power && !(t_lo > 0.0)) throw ValidationError("tail fit: require t_lo > 0");

  std::vector<std::vector<std::size_t>> groups;
  if (width > 0.0) {
    if (t_hi - t_lo < 3.0 * width) {
      std::ostringstream os;
      os << "fit: window [" << t_lo << ", " << t_hi << "] spans fewer than 3 oscillation periods (" << width << ")";
      throw ValidationError(os.str());
    }
    const int nb = static_cast<int>(std::floor((t_hi - t_lo) / width));
    groups.resize(static_cast<std::size_t>(nb));
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double t = c.times[i];
      if (t < t_lo || t >= t_lo + nb * width) continue;
      const auto k = std::min<std::size_t>(static_cast<std::size_t>((t - t_lo) / width), groups.size() - 1);
      groups[k].push_back(i);
    }
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
  } else {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c.times[i] >= t_lo && c.times[i] <= t_hi) groups.push_back({i});
  }
  if (groups.size() < 3) throw ValidationError("fit: fewer than 3 usable points in window");

  std::vector<double> y(groups.size()), x(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    double sp = 0, st = 0;
    for (auto i : groups[k]) {
      if (!(c.values[i] > 0.0)) throw ValidationError("fit: non-positive survival value in window");
      sp += c.values[i];
      st += c.times[i];
    }
    y[k] = std::log(sp / groups[k].size());
    x[k] = st / groups[k].size();
  }

  auto transform = [&](const std::vector<double>& t) {
    if (shape == FitShape::exponential) return t;
    std::vector<double> lt(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) lt[k] = std::log(t[k]);
    return lt;
  };

  LineFit fit = least_squares(transform(x), y);
  for (int iter = 0; iter < 50; ++iter) {
    const double d = -fit.slope;
    if (std::abs(d) < 1e-14) break;
    double change = 0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      double m = 0;
      for (auto i : groups[k]) {
        const double t = c.times[i];
        m += shape == FitShape::power ? std::pow(t, -d) : std::exp(-d * (t - x[k]));
      }
      m /= groups[k].size();
      const double nx = shape == FitShape::power ? std::pow(m, -1.0 / d) : x[k] - std::log(m) / d;
      change = std::max(change, std::abs(nx - x[k]) / std::max(1.0, std::abs(x[k])));
      x[k] = nx;
    }
    fit = least_squares(transform(x), y);
    if (change < 1e-13) break;
  }
  return {-fit.slope, std::exp(fit.intercept), fit.residual, static_cast<int>(groups.size())};
}

}  // namespace

TailFit tail_exponent_fit(const SurvivalCurve& curve, double t_lo, double t_hi, double oscillation_frequency) {
  if (!(oscillation_frequency > 0.0)) throw ValidationError("tail fit: oscillation frequency must be > 0");
  const auto b = block_fit(curve, t_lo, t_hi, std::numbers::pi / oscillation_frequency, FitShape::power);
  return {b.decay, b.amplitude, b.residual, b.blocks};
}

std::vector<double> block_sampling_grid(double t_lo, double t_hi, double oscillation_frequency, int blocks,
                                        int samples_per_block) {
  if (!(oscillation_frequency > 0.0) || !(t_hi > t_lo) || !(t_lo > 0.0) || blocks < 1 || samples_per_block < 1)
    throw ValidationError("block_sampling_grid: invalid arguments");
  const double width = std::numbers::pi / oscillation_frequency;
  const long total = static_cast<long>(std::floor((t_hi - t_lo) / width));
  if (total < 1) throw ValidationError("block_sampling_grid: window shorter than one block");
  std::vector<long> picked;
  for (int i = 0; i < blocks; ++i) {
    const double frac = blocks == 1 ? 0.0 : static_cast<double>(i) / (blocks - 1);
    const double start = t_lo * std::pow((t_lo + total * width) / t_lo, frac);
    const long k = std::clamp(static_cast<long>((start - t_lo) / width), 0L, total - 1);
    if (picked.empty() || k > picked.back()) picked.push_back(k);
  }
  std::vector<double> grid;
  grid.reserve(picked.size() * static_cast<std::size_t>(samples_per_block));
  for (long k : picked)
    for (int j = 0; j < samples_per_block; ++j) grid.push_back(t_lo + width * (k + (j + 0.5) / samples_per_block));
  return grid;
}

RateFit exponential_rate_fit(const SurvivalCurve& curve, double t_lo, double t_hi, double oscillation_frequency) {
  const double width = oscillation_frequency > 0.0 ? std::numbers::pi / oscillation_frequency : 0.0;
  const auto b = block_fit(curve, t_lo, t_hi, width, FitShape::exponential);
  return {b.decay, b.amplitude, b.residual, b.blocks};
}

}  // namespace zeno
