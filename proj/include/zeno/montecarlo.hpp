#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zeno/liouville.hpp"
#include "zeno/renewal.hpp"
#include "zeno/survival_curve.hpp"

namespace zeno {

enum class McEstimator { product, bernoulli };

std::string to_string(McEstimator e);
McEstimator parse_estimator(const std::string& name);

/// Trajectory k draws from make_stream(master_seed, k).  Trajectories are
/// grouped into chunks of kMcChunk consecutive indices; chunk statistics are
/// merged in a fixed pairwise tree, so results do not depend on `threads`.
struct McConfig {
  std::uint64_t n_trajectories = 100000;
  std::uint64_t master_seed = 1;
  std::vector<double> times;
  McEstimator estimator = McEstimator::product;
  /// Evaluate p1 exactly at every use instead of interpolating a table.
  bool direct_p1 = false;
  /// Worker threads; 0 means the hardware concurrency.  ZENO_THREADS caps it.
  unsigned threads = 0;
};

inline constexpr std::uint64_t kMcChunk = 1024;

/// Number of workers to use for a request, honouring ZENO_THREADS.
unsigned worker_count(unsigned requested);

/// Cubic Hermite table of p1(t) = survival_no_measurement on [0, t_max],
/// clamped to [0, 1].
class FreeSurvivalTable {
 public:
  FreeSurvivalTable(const SystemModel& model, double t_max, double step);

  double operator()(double t) const;
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }

 private:
  double step_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Table step min(1 / (20 E), 1 / (20 w_r)) with E half the generator's
/// spectral radius, coarsened if the table would exceed 2^21 nodes.
double default_table_step(const SystemModel& model, const RenewalModel& renewal, double t_max);

/// Measurement-averaged survival from renewal trajectories.  Product mode
/// averages p1(t - t_n) prod_j p1(tau_j); Bernoulli mode replaces each factor
/// by a coin flip with that probability.  Values carry standard errors.
SurvivalCurve simulate_survival(const SystemModel& model, const RenewalModel& renewal, const McConfig& cfg);

/// Histogram of renewal counts in (0, t].  Bins run up to the largest count
/// observed, so the mass sums to one and tail_mass is zero.
CountDistribution simulate_counts(const RenewalModel& renewal, double t, const McConfig& cfg);

}  // namespace zeno
