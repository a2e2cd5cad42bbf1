#include "zeno/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "zeno/error.hpp"

namespace zeno {

std::string to_string(McEstimator e) { return e == McEstimator::product ? "product" : "bernoulli"; }

McEstimator parse_estimator(const std::string& name) {
  if (name == "product") return McEstimator::product;
  if (name == "bernoulli") return McEstimator::bernoulli;
  throw ValidationError("unknown estimator '" + name + "' (expected product or bernoulli)");
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ZENO_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) throw ValidationError(std::string("ZENO_THREADS must be a positive integer, got '") + env + "'");
    n = std::min<unsigned>(n, static_cast<unsigned>(std::min<long>(cap, 1 << 16)));
  }
  return n;
}

FreeSurvivalTable::FreeSurvivalTable(const SystemModel& model, double t_max, double step)
    : step_(step) {
  if (!(step > 0.0) || !(t_max >= 0.0)) throw ValidationError("FreeSurvivalTable: need step > 0 and t_max >= 0");
  const FreeSurvival p1(model);
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::ceil(t_max / step)));
  values_.resize(intervals + 1);
  slopes_.resize(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = static_cast<double>(i) * step;
    values_[i] = p1(t);
    slopes_[i] = p1.derivative(t);
  }
}

double FreeSurvivalTable::operator()(double t) const {
  const double x = t / step_;
  const std::size_t last = values_.size() - 2;
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, x)), last);
  const double u = x - static_cast<double>(i);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  const double v = h00 * values_[i] + h10 * step_ * slopes_[i] + h01 * values_[i + 1] + h11 * step_ * slopes_[i + 1];
  return std::clamp(v, 0.0, 1.0);
}

double default_table_step(const SystemModel& model, const RenewalModel& renewal, double t_max) {
  const double energy = 0.5 * FreeSurvival(model).spectral_radius();
  double step = 1.0 / (20.0 * characteristic_rate(renewal));
  if (energy > 0.0) step = std::min(step, 1.0 / (20.0 * energy));
  return std::max(step, t_max / static_cast<double>(1 << 21));
}

namespace {

double uniform01(RandomStream& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Moments {
  double count = 0.0;
  std::vector<double> mean;
  std::vector<double> m2;
};

Moments merge(const Moments& a, const Moments& b) {
  Moments out;
  out.count = a.count + b.count;
  out.mean.resize(a.mean.size());
  out.m2.resize(a.mean.size());
  const double wb = b.count / out.count;
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    const double delta = b.mean[i] - a.mean[i];
    out.mean[i] = a.mean[i] + delta * wb;
    out.m2[i] = a.m2[i] + b.m2[i] + delta * delta * a.count * wb;
  }
  return out;
}

template <typename T, typename Merge>
T tree_reduce(const std::vector<T>& parts, std::size_t lo, std::size_t hi, Merge merge_fn) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge_fn(tree_reduce(parts, lo, mid, merge_fn), tree_reduce(parts, mid, hi, merge_fn));
}

// Runs chunk_fn(chunk_index) for every chunk on the worker pool and returns
// the per-chunk results in index order.
template <typename T, typename ChunkFn>
std::vector<T> run_chunks(std::uint64_t n_trajectories, unsigned threads, ChunkFn chunk_fn) {
  const std::size_t chunks = static_cast<std::size_t>((n_trajectories + kMcChunk - 1) / kMcChunk);
  std::vector<T> results(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        results[c] = chunk_fn(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    }
  };
  const unsigned n = std::min<unsigned>(worker_count(threads), static_cast<unsigned>(std::max<std::size_t>(chunks, 1)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

SurvivalCurve simulate_survival(const SystemModel& model, const RenewalModel& renewal, const McConfig& cfg) {
  check_time_grid(cfg.times);
  if (cfg.times.empty()) throw ValidationError("simulate_survival: empty time grid");
  if (cfg.n_trajectories < 1) throw ValidationError("simulate_survival: need at least one trajectory");
  const std::vector<double>& times = cfg.times;
  const double t_max = times.back();

  const FreeSurvival direct(model);
  std::optional<FreeSurvivalTable> table;
  if (!cfg.direct_p1) table.emplace(model, t_max, default_table_step(model, renewal, t_max));
  auto p1 = [&](double t) { return table ? (*table)(t) : std::clamp(direct(t), 0.0, 1.0); };
  const bool bernoulli = cfg.estimator == McEstimator::bernoulli;

  auto chunk = [&](std::size_t c) {
    const std::uint64_t begin = c * kMcChunk;
    const std::uint64_t end = std::min<std::uint64_t>(begin + kMcChunk, cfg.n_trajectories);
    Moments m;
    m.mean.assign(times.size(), 0.0);
    m.m2.assign(times.size(), 0.0);
    std::vector<double> x(times.size());
    for (std::uint64_t k = begin; k < end; ++k) {
      RandomStream rng = make_stream(cfg.master_seed, k);
      double last = 0.0;
      double next = sample_interval(renewal, rng);
      double weight = 1.0;  // product of completed factors, or the Bernoulli survival indicator
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        while (next <= t && weight > 0.0) {
          const double f = p1(next - last);
          weight = bernoulli ? (uniform01(rng) < f ? 1.0 : 0.0) : weight * f;
          last = next;
          next = last + sample_interval(renewal, rng);
        }
        if (weight == 0.0) {
          x[i] = 0.0;
        } else {
          const double f = p1(t - last);
          x[i] = bernoulli ? (uniform01(rng) < f ? 1.0 : 0.0) : weight * f;
        }
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
          std::ostringstream os;
          os << "simulate_survival: trajectory " << k << " left [0, 1] at t = " << t << " (" << x[i] << ")";
          throw NumericalError(os.str());
        }
      }
      m.count += 1.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double delta = x[i] - m.mean[i];
        m.mean[i] += delta / m.count;
        m.m2[i] += delta * (x[i] - m.mean[i]);
      }
    }
    return m;
  };

  const auto parts = run_chunks<Moments>(cfg.n_trajectories, cfg.threads, chunk);
  const Moments total = tree_reduce(parts, 0, parts.size(), merge);

  SurvivalCurve curve;
  curve.provenance = Provenance::monte_carlo;
  curve.times = times;
  curve.values = total.mean;
  if (cfg.n_trajectories > 1) {
    const double n = total.count;
    std::vector<double> se(times.size());
    for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(total.m2[i] / (n - 1.0) / n);
    curve.stderrs = std::move(se);
  }
  curve.metadata["estimator"] = to_string(cfg.estimator);
  curve.metadata["n_trajectories"] = std::to_string(cfg.n_trajectories);
  curve.metadata["master_seed"] = std::to_string(cfg.master_seed);
  curve.metadata["renewal"] = describe(renewal);
  if (table) {
    std::ostringstream os;
    os.precision(6);
    os << "table(step=" << table->step() << ",nodes=" << table->size() << ")";
    curve.metadata["p1"] = os.str();
  } else {
    curve.metadata["p1"] = "direct";
  }
  return curve;
}

CountDistribution simulate_counts(const RenewalModel& renewal, double t, const McConfig& cfg) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("simulate_counts: t must be > 0");
  if (cfg.n_trajectories < 1) throw ValidationError("simulate_counts: need at least one trajectory");
  using Histogram = std::vector<std::uint64_t>;
  auto chunk = [&](std::size_t c) {
    const std::uint64_t begin = c * kMcChunk;
    const std::uint64_t end = std::min<std::uint64_t>(begin + kMcChunk, cfg.n_trajectories);
    Histogram h;
    for (std::uint64_t k = begin; k < end; ++k) {
      RandomStream rng = make_stream(cfg.master_seed, k);
      const auto n = static_cast<std::size_t>(count_events(renewal, t, rng));
      if (n >= h.size()) h.resize(n + 1, 0);
      ++h[n];
    }
    return h;
  };
  const auto parts = run_chunks<Histogram>(cfg.n_trajectories, cfg.threads, chunk);
  const Histogram hist = tree_reduce(parts, 0, parts.size(), [](Histogram a, const Histogram& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
  });

  const auto total = static_cast<double>(cfg.n_trajectories);
  CountDistribution out;
  out.horizon = t;
  for (std::uint64_t c : hist) {
    const double p = static_cast<double>(c) / total;
    out.probs.push_back(p);
    out.stderrs.push_back(std::sqrt(p * (1.0 - p) / total));
  }
  return out;
}

}  // namespace zeno
