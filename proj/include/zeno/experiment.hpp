#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "zeno/analytic.hpp"
#include "zeno/config.hpp"

namespace zeno {

/// Version string baked in at configure time (git describe).
std::string zeno_version();

// Figure presets.  Units of v = 1 throughout.

struct Fig1Series {
  double epsilon_bar = 0.0;
  double tau = 0.0;
  std::vector<double> tau_r;
  std::vector<double> values;  ///< p(tau | tau_r) under Poisson measurements with w_r = 1 / tau_r
  double argmin_tau_r = 0.0;   ///< refined by a parabola in log tau_r through the grid minimum
  bool non_monotonic = false;  ///< the minimum is interior and both ends lie above it
};

inline const std::vector<double> kFig1EpsilonBars{2.5, 1.0, 0.5, 0.25};
inline const std::vector<double> kFig1Taus{5.0, 10.0};

/// 161-point log grid on [1e-2, 1e2].
std::vector<double> fig1_tau_r_grid();
Fig1Series fig1_series(double epsilon_bar, double tau, const std::vector<double>& tau_r,
                       const InversionSettings& inversion = {});

struct AnomalousPair {
  double epsilon_bar;
  double alpha;
};

inline const std::vector<AnomalousPair> kFig2aPairs{{0.94, 0.1}, {0.53, 0.3}};
inline const std::vector<AnomalousPair> kFig2bPairs{{0.53, 0.92}, {0.94, 0.92}, {0.53, 0.97}, {0.94, 0.97}};

/// Power-law fit of the anomalous-limit survival over t in [1e2, 1e4],
/// block averaged over the Rabi half period.
TailFit fig2a_tail_fit(const AnomalousPair& pair, const InversionSettings& inversion = {});

struct Fig2bFit {
  RateFit fit;
  double w_z;            ///< pi (1 - alpha) sqrt(eps_bar^2 + 1) / 2
  double w_z_rederived;  ///< pi (1 - alpha) / (2 sqrt(eps_bar^2 + 1))
};

/// Exponential fit over [1 / w_z, 3 / w_z].
Fig2bFit fig2b_rate_fit(const AnomalousPair& pair, const InversionSettings& inversion = {});

struct RunResult {
  std::vector<std::string> files;  ///< relative to the output directory, sorted
  nlohmann::json summary;
  /// 0, or 4 when a validate run had failing criteria.
  int exit_code = 0;
};

/// Runs the experiment, writing its artifacts and summary.json into
/// config.output_dir.  Numerical failures surface as NumericalError with the
/// engine named in the message.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace zeno
