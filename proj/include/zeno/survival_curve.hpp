#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zeno {

enum class Provenance { analytic, monte_carlo };

std::string to_string(Provenance p);

/// Survival probabilities on an increasing time grid.
struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::optional<std::vector<double>> stderrs;
  /// Per-point truncation-error estimates of a numerical inversion.
  std::optional<std::vector<double>> error_estimates;
  Provenance provenance = Provenance::analytic;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return times.size(); }
};

/// Throws ValidationError unless the grid is non-negative and strictly increasing.
void check_time_grid(const std::vector<double>& times);

/// Uniform grid of `points` values on [lo, hi] (both ends included).
std::vector<double> linear_grid(double lo, double hi, int points);
/// Logarithmically uniform grid on [lo, hi], lo > 0.
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace zeno
