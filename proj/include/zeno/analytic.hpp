#pragma once

// Laplace-domain solution of the measurement-averaged dynamics.
//
// With Omega = eps + L and the renewal function Phi, the averaged propagator is
//   U~(eps) = Omega^-1 Phi(Omega) [Phi(Omega) + Q]^-1
// and the survival transform is its <mm|.|mm> element.

#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "zeno/laplace.hpp"
#include "zeno/liouville.hpp"
#include "zeno/renewal.hpp"
#include "zeno/survival_curve.hpp"

namespace zeno {

enum class SurvivalMethod { supermatrix, scalar };

/// Evaluates U~(eps) for one (model, renewal) pair.  The eigendecomposition
/// of L (Mittag-Leffler) or exp(-t_r L) (equidistant) is computed once.
class AveragedPropagator {
 public:
  AveragedPropagator(const SystemModel& model, const RenewalModel& renewal);

  SuperOp operator()(Complex eps) const;
  Complex survival(Complex eps) const;
  /// Phi(eps + L)
  SuperOp phi_of_omega(Complex eps) const;

 private:
  SuperOp generator_;
  Projectors projectors_;
  RenewalModel renewal_;
  Eigen::Index index_;
  std::optional<SpectralDecomposition> spectral_;
  SuperOp decay_;  // exp(-t_r L), equidistant only
};

SuperOp averaged_propagator_laplace(Complex eps, const SystemModel& model, const RenewalModel& renewal);

/// (eps + L + w_r Q)^-1, the Poisson resolvent.
SuperOp poisson_resolvent(Complex eps, const SystemModel& model, double w_r);

/// Survival transform p~(eps) by the supermatrix product or by the scalar
/// renewal sum P~_p(eps) / (1 - W~_p(eps)) with quadrature of P(t) p_1(t) and W(t) p_1(t).
Complex survival_laplace(Complex eps, const SystemModel& model, const RenewalModel& renewal,
                         SurvivalMethod method = SurvivalMethod::supermatrix);

/// Closed form for Poissonian measurements of the two-level model, with optional relaxation.
Complex survival_laplace_poisson(Complex eps, const TwoLevelParams& p, const std::optional<RelaxationParams>& r,
                                 double w_r);

/// w_r -> infinity limit for Mittag-Leffler measurements of the dynamic two-level model.
Complex survival_laplace_anomalous_limit(Complex eps, const TwoLevelParams& p, double alpha);

/// Fast-dephasing anomalous limit with the balance rate w~_d^0.
Complex survival_laplace_relaxed_anomalous(Complex eps, double alpha, double w_tilde_d0);

LaplaceSurvival supermatrix_survival(const SystemModel& model, const RenewalModel& renewal);
LaplaceSurvival scalar_survival(const SystemModel& model, const RenewalModel& renewal);
LaplaceSurvival poisson_survival(const TwoLevelParams& p, const std::optional<RelaxationParams>& r, double w_r);
LaplaceSurvival anomalous_limit_survival(const TwoLevelParams& p, double alpha);
LaplaceSurvival relaxed_anomalous_survival(double alpha, double w_tilde_d0);

/// Inverse transform on a grid that may start at t = 0; p(0) is taken from
/// the initial-value theorem eps p~(eps) at eps = 1e12.
SurvivalCurve survival_curve(const LaplaceSurvival& f, const std::vector<double>& times,
                             const InversionSettings& settings = {});

/// Equidistant measurements need no inversion: p(t) = p_1(t - n t_r) p_1(t_r)^n
/// with n = floor(t / t_r), where p_1 is the free survival of the model.
SurvivalCurve equidistant_survival_curve(const SystemModel& model, double t_r, const std::vector<double>& times);

struct DerivedRates {
  double w0_bar;                       ///< 2 w_r v^2 / (w_r^2 + 4 eps^2)
  double w_rm_bar;                     ///< (2 + 4 eps_bar^2)^(1/2), in units of v
  std::optional<double> w_d0_bar;      ///< w_d + 2 w_rp v^2 / (w_rp^2 + 4 eps^2)
  std::optional<double> w_d0_tilde;    ///< w_d + 2 v^2 w_p / (w_p^2 + 4 eps^2)
  std::optional<double> w_z;           ///< pi (1 - alpha) v sqrt(eps_bar^2 + 1) / 2
};

DerivedRates derived_rates(const TwoLevelParams& p, const std::optional<RelaxationParams>& r, double w_r,
                           std::optional<double> alpha = std::nullopt);

/// t_Z = 1/w_r + 1/w0_bar (or 1/w_d0_bar with relaxation).
double zeno_time_poisson(const TwoLevelParams& p, const std::optional<RelaxationParams>& r, double w_r);

struct ZenoTimeEstimate {
  double value;
  /// Relative disagreement of the two first-order Richardson values.
  double spread;
};

/// t_Z = p~(0) from p~ at eps = {1e-4, 5e-5, 2.5e-5} * scale, Richardson
/// extrapolated; scale defaults to the largest |H| entry.  Throws
/// ValidationError for Mittag-Leffler renewals (t_Z diverges) and
/// NumericalError when the spread exceeds 0.5%.
ZenoTimeEstimate zeno_time(const SystemModel& model, const RenewalModel& renewal,
                           std::optional<double> scale = std::nullopt);

struct ZenoScan {
  std::vector<double> w_r_grid;
  std::vector<double> t_Z_values;
  double argmin_w_r = 0.0;
};

ZenoScan zeno_scan(const TwoLevelParams& p, const std::optional<RelaxationParams>& r,
                   const std::vector<double>& w_r_grid);

struct TailFit {
  double exponent;
  double amplitude;
  double fit_residual;
  int blocks;
};

/// Fits p(t) ~ amplitude * t^-exponent on [t_lo, t_hi] after averaging the
/// curve over consecutive blocks of width pi / oscillation_frequency.
TailFit tail_exponent_fit(const SurvivalCurve& curve, double t_lo, double t_hi, double oscillation_frequency);

/// Time points for the block-averaged fits: up to `blocks` of the consecutive
/// blocks of width pi / oscillation_frequency starting at t_lo, chosen
/// log-uniformly across [t_lo, t_hi], each sampled at `samples_per_block`
/// midpoints.  Lets a fit over decades of time use a few thousand points.
std::vector<double> block_sampling_grid(double t_lo, double t_hi, double oscillation_frequency, int blocks,
                                        int samples_per_block = 16);

struct RateFit {
  double rate;
  double amplitude;
  double fit_residual;
  int blocks;
};

/// Fits p(t) ~ amplitude * exp(-rate t) on [t_lo, t_hi]; block averaging as
/// above when oscillation_frequency > 0, pointwise otherwise.
RateFit exponential_rate_fit(const SurvivalCurve& curve, double t_lo, double t_hi, double oscillation_frequency = 0.0);

}  // namespace zeno
