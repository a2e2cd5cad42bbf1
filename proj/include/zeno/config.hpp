#pragma once

// Experiment configuration: one JSON document, physical quantities in units
// of the coupling v (energies and rates divided by v, times multiplied by v).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zeno/error.hpp"
#include "zeno/laplace.hpp"
#include "zeno/liouville.hpp"
#include "zeno/montecarlo.hpp"
#include "zeno/renewal.hpp"

namespace zeno {

/// Schema violation at a JSON-pointer location such as "/renewal/alpha".
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

enum class RunKind { survival, tz_scan, counts, fig1, fig2, validate };
std::string to_string(RunKind k);

struct GridSpec {
  bool log = false;
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  std::vector<double> values() const;
  bool operator==(const GridSpec&) const = default;
};

enum class RenewalKind { poisson, equidistant, mittag_leffler };

struct RenewalSpec {
  RenewalKind kind = RenewalKind::poisson;
  double w_r = 1.0;    ///< poisson, mittag-leffler
  double t_r = 1.0;    ///< equidistant
  double alpha = 1.0;  ///< mittag-leffler
  bool operator==(const RenewalSpec&) const = default;
};

/// How the analytic engine obtains p(t).  `automatic` uses the exact
/// time-domain product for equidistant renewals and the supermatrix
/// transform otherwise.
enum class AnalyticMethod { automatic, supermatrix, scalar, closed_form, anomalous_limit, relaxed_anomalous };
std::string to_string(AnalyticMethod m);

struct McSpec {
  std::uint64_t trajectories = 100000;
  std::uint64_t seed = 1;
  McEstimator estimator = McEstimator::product;
  bool direct_p1 = false;
  bool operator==(const McSpec&) const = default;
};

struct ExperimentConfig {
  RunKind run = RunKind::survival;

  // survival, tz-scan, counts
  double v = 1.0;
  double epsilon = 0.0;
  std::optional<double> w_d;
  std::optional<double> w_p;

  // survival, counts
  std::optional<RenewalSpec> renewal;
  std::vector<std::string> engines{"analytic"};
  AnalyticMethod method = AnalyticMethod::automatic;
  McSpec mc;

  std::optional<GridSpec> time_grid;  // survival
  std::optional<GridSpec> w_r_grid;   // tz-scan
  double count_time = 1.0;            // counts
  int count_max = kDefaultMaxCount;   // counts

  InversionSettings inversion;
  std::string filter;  // validate

  std::string output_dir = "out";
  bool csv = true;
  bool svg = true;

  bool uses_system() const;
  bool uses_renewal() const;
  bool uses_engines() const;
  bool uses_mc() const;

  /// Physical objects, with the unit scale v applied.
  SystemModel model() const;
  TwoLevelParams two_level() const;
  std::optional<RelaxationParams> relaxation() const;
  RenewalModel renewal_model() const;
  McConfig mc_config(std::vector<double> physical_times) const;
};

/// Parses and validates; every problem is a ConfigError with its JSON pointer.
/// Unknown keys are rejected, and keys that the run kind does not use are
/// rejected too, so a config never silently carries dead settings.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical form with every default filled in, restricted to the sections
/// the run kind uses.  parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

/// Built-in configurations for `zeno fig1`, `zeno fig2` and `zeno validate`.
ExperimentConfig preset_config(RunKind kind);

}  // namespace zeno
