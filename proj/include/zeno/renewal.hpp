#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace zeno {

/// Exponential waiting times: P(t) = exp(-w_r t).
class Poisson {
 public:
  explicit Poisson(double rate);
  double rate() const { return rate_; }

 private:
  double rate_;
};

/// Measurements at fixed spacing t_r: P(t) = theta(t_r - t).
class Equidistant {
 public:
  explicit Equidistant(double period);
  double period() const { return period_; }

 private:
  double period_;
};

/// Heavy-tailed waiting times: P(t) = E_alpha(-(w_r t)^alpha), 0 < alpha <= 1.
class MittagLeffler {
 public:
  MittagLeffler(double alpha, double rate);
  double alpha() const { return alpha_; }
  double rate() const { return rate_; }

 private:
  double alpha_;
  double rate_;
};

using RenewalModel = std::variant<Poisson, Equidistant, MittagLeffler>;

/// Characteristic rate w_r of the model (1/t_r for equidistant).
double characteristic_rate(const RenewalModel& model);
std::string describe(const RenewalModel& model);

/// Waiting-time density W(t); zero for t < 0.  Equidistant has no density and throws.
double pdf_W(const RenewalModel& model, double t);
/// P(t) = probability that an interval exceeds t.
double survival_P(const RenewalModel& model, double t);
/// Phi(eps) with W~(eps) = 1 / (1 + Phi(eps)), principal branch.
std::complex<double> phi(const RenewalModel& model, std::complex<double> eps);

/// Per-trajectory random stream.  Stream k of a run is seeded with
/// splitmix64(master_seed ^ splitmix64(k + 1)), so streams depend only on
/// (master_seed, k) and never on scheduling.
using RandomStream = std::mt19937_64;
std::uint64_t splitmix64(std::uint64_t x);
RandomStream make_stream(std::uint64_t master_seed, std::uint64_t index);

/// One waiting time.  Mittag-Leffler draws use T = E^(1/alpha) S / w_r with E
/// unit exponential and S one-sided alpha-stable (Laplace transform exp(-s^alpha)).
double sample_interval(const RenewalModel& model, RandomStream& rng);

struct CountDistribution {
  double horizon = 0.0;
  std::vector<double> probs;    ///< pi_0 .. pi_{n_max}
  double tail_mass = 0.0;       ///< P(N > n_max), computed independently of probs
  std::vector<double> stderrs;  ///< per-bin standard errors (Monte Carlo only)
  double total() const;
};

enum class CountMethod { convolution, monte_carlo };

struct CountMcOptions {
  std::uint64_t n_trajectories = 100000;
  std::uint64_t master_seed = 1;
};

inline constexpr int kDefaultMaxCount = 64;

/// pi_n(t), the probability of n events in (0, t].  Equidistant models are
/// always evaluated exactly (pi_n = [n == floor(t / t_r)]).
CountDistribution count_probabilities(const RenewalModel& model, double t, int n_max = kDefaultMaxCount,
                                      CountMethod method = CountMethod::convolution,
                                      const CountMcOptions& mc = {});

/// Number of renewals in (0, t] along one sampled trajectory.
int count_events(const RenewalModel& model, double t, RandomStream& rng);

}  // namespace zeno
