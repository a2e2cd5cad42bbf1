#include "zeno/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace zeno {

using nlohmann::json;

ConfigError::ConfigError(std::string pointer, const std::string& message)
    : ValidationError((pointer.empty() ? std::string("(document)") : pointer) + ": " + message),
      pointer_(std::move(pointer)) {}

std::string to_string(RunKind k) {
  switch (k) {
    case RunKind::survival: return "survival";
    case RunKind::tz_scan: return "tz-scan";
    case RunKind::counts: return "counts";
    case RunKind::fig1: return "fig1";
    case RunKind::fig2: return "fig2";
    case RunKind::validate: return "validate";
  }
  return "?";
}

std::string to_string(AnalyticMethod m) {
  switch (m) {
    case AnalyticMethod::automatic: return "auto";
    case AnalyticMethod::supermatrix: return "supermatrix";
    case AnalyticMethod::scalar: return "scalar";
    case AnalyticMethod::closed_form: return "closed-form";
    case AnalyticMethod::anomalous_limit: return "anomalous-limit";
    case AnalyticMethod::relaxed_anomalous: return "relaxed-anomalous";
  }
  return "?";
}

namespace {

std::string renewal_name(RenewalKind k) {
  switch (k) {
    case RenewalKind::poisson: return "poisson";
    case RenewalKind::equidistant: return "equidistant";
    case RenewalKind::mittag_leffler: return "mittag-leffler";
  }
  return "?";
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

// A JSON object being consumed key by key.  finish() rejects whatever was
// not consumed, which catches typos as well as settings the run ignores.
class Section {
 public:
  Section(const json& node, std::string pointer) : node_(node), pointer_(std::move(pointer)) {
    if (!node_.is_object()) throw ConfigError(pointer_, "expected an object");
  }

  std::string at(const std::string& key) const { return pointer_ + "/" + escape_token(key); }
  bool has(const std::string& key) const { return node_.contains(key); }

  const json* take(const std::string& key) {
    taken_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  Section object(const std::string& key) {
    const json* v = take(key);
    if (v == nullptr) throw ConfigError(at(key), "required section is missing");
    return Section(*v, at(key));
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = take(key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      throw ConfigError(at(key), "required number is missing");
    }
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(at(key), "must be > 0");
    return x;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t minimum) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    std::ostringstream os;
    os << "expected an integer >= " << minimum;
    if (v->is_number_unsigned()) {
      const auto u = v->get<std::uint64_t>();
      if (u < minimum) throw ConfigError(at(key), os.str());
      return u;
    }
    if (v->is_number_integer()) {
      const auto i = v->get<std::int64_t>();
      if (i < 0 || static_cast<std::uint64_t>(i) < minimum) throw ConfigError(at(key), os.str());
      return static_cast<std::uint64_t>(i);
    }
    // Floats such as 1e5 are accepted when they hold an exact integer.
    if (!v->is_number_float()) throw ConfigError(at(key), os.str());
    const double x = v->get<double>();
    if (x != std::floor(x) || x < static_cast<double>(minimum) || x > 9007199254740992.0)
      throw ConfigError(at(key), os.str());
    return static_cast<std::uint64_t>(x);
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = take(key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      throw ConfigError(at(key), "required string is missing");
    }
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    return v->get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v->get<bool>();
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) throw ConfigError(at(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a string");
      out.push_back((*v)[i].get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!taken_.contains(it.key())) throw ConfigError(at(it.key()), "unknown or unused key");
  }

 private:
  const json& node_;
  std::string pointer_;
  std::set<std::string> taken_;
};

GridSpec parse_grid(Section s, bool positive_only) {
  GridSpec g;
  const std::string scale = s.text("scale", "linear");
  if (scale != "linear" && scale != "log") throw ConfigError(s.at("scale"), "expected \"linear\" or \"log\"");
  g.log = scale == "log";
  g.min = s.number("min");
  g.max = s.number("max");
  g.points = static_cast<int>(s.count("points", 0, 1));
  if (g.points == 0) throw ConfigError(s.at("points"), "required integer is missing");
  if (g.points > 10000000) throw ConfigError(s.at("points"), "at most 10^7 points");
  if ((g.log || positive_only) ? !(g.min > 0.0) : !(g.min >= 0.0))
    throw ConfigError(s.at("min"), (g.log || positive_only) ? "must be > 0" : "must be >= 0");
  if (g.points == 1 ? g.max != g.min : !(g.max > g.min))
    throw ConfigError(s.at("max"), g.points == 1 ? "must equal min for a single point" : "must exceed min");
  s.finish();
  return g;
}

json grid_json(const GridSpec& g) {
  return {{"scale", g.log ? "log" : "linear"}, {"min", g.min}, {"max", g.max}, {"points", g.points}};
}

RenewalSpec parse_renewal(Section s) {
  RenewalSpec r;
  const std::string model = s.text("model");
  if (model == "poisson") {
    r.kind = RenewalKind::poisson;
    r.w_r = s.positive("w_r");
  } else if (model == "equidistant") {
    r.kind = RenewalKind::equidistant;
    r.t_r = s.positive("t_r");
  } else if (model == "mittag-leffler") {
    r.kind = RenewalKind::mittag_leffler;
    r.w_r = s.positive("w_r");
    r.alpha = s.number("alpha");
    if (!(r.alpha > 0.0 && r.alpha <= 1.0)) throw ConfigError(s.at("alpha"), "must lie in (0, 1]");
  } else {
    throw ConfigError(s.at("model"), "expected \"poisson\", \"equidistant\" or \"mittag-leffler\"");
  }
  s.finish();
  return r;
}

json renewal_json(const RenewalSpec& r) {
  json j{{"model", renewal_name(r.kind)}};
  if (r.kind == RenewalKind::equidistant) {
    j["t_r"] = r.t_r;
  } else {
    j["w_r"] = r.w_r;
    if (r.kind == RenewalKind::mittag_leffler) j["alpha"] = r.alpha;
  }
  return j;
}

AnalyticMethod parse_method(const std::string& name, const std::string& pointer) {
  for (auto m : {AnalyticMethod::automatic, AnalyticMethod::supermatrix, AnalyticMethod::scalar,
                 AnalyticMethod::closed_form, AnalyticMethod::anomalous_limit, AnalyticMethod::relaxed_anomalous})
    if (to_string(m) == name) return m;
  throw ConfigError(pointer,
                    "expected one of auto, supermatrix, scalar, closed-form, anomalous-limit, relaxed-anomalous");
}

InversionSettings parse_inversion(Section s) {
  InversionSettings d;
  InversionSettings out;
  out.terms = static_cast<int>(s.count("terms", static_cast<std::uint64_t>(d.terms), 12));
  if (out.terms > 4096) throw ConfigError(s.at("terms"), "at most 4096");
  out.resolve_factor = s.number("resolve_factor", d.resolve_factor);
  if (!(out.resolve_factor >= 0.0)) throw ConfigError(s.at("resolve_factor"), "must be >= 0");
  out.plateau_tolerance = s.positive("plateau_tolerance", d.plateau_tolerance);
  out.period_factor = s.number("period_factor", d.period_factor);
  if (!(out.period_factor > 1.0)) throw ConfigError(s.at("period_factor"), "must be > 1");
  out.damping = s.positive("damping", d.damping);
  out.group_span = s.number("group_span", d.group_span);
  if (!(out.group_span >= 1.0)) throw ConfigError(s.at("group_span"), "must be >= 1");
  out.max_error = s.positive("max_error", d.max_error);
  s.finish();
  return out;
}

json inversion_json(const InversionSettings& s) {
  return {{"terms", s.terms},
          {"resolve_factor", s.resolve_factor},
          {"plateau_tolerance", s.plateau_tolerance},
          {"period_factor", s.period_factor},
          {"damping", s.damping},
          {"group_span", s.group_span},
          {"max_error", s.max_error}};
}

bool uses_inversion(const ExperimentConfig& c) {
  return c.run == RunKind::survival || c.run == RunKind::fig1 || c.run == RunKind::fig2;
}

RunKind parse_run(const std::string& name) {
  for (auto k : {RunKind::survival, RunKind::tz_scan, RunKind::counts, RunKind::fig1, RunKind::fig2,
                 RunKind::validate})
    if (to_string(k) == name) return k;
  throw ConfigError("/run", "expected one of survival, tz-scan, counts, fig1, fig2, validate");
}

void check_method(const ExperimentConfig& c) {
  const std::string where = "/analytic/method";
  const RenewalKind k = c.renewal->kind;
  const bool relaxed = c.w_d.has_value();
  switch (c.method) {
    case AnalyticMethod::automatic: return;
    case AnalyticMethod::supermatrix:
    case AnalyticMethod::scalar:
      if (k == RenewalKind::equidistant)
        throw ConfigError(where, "equidistant renewals use the exact time-domain product; use \"auto\"");
      return;
    case AnalyticMethod::closed_form:
      if (k != RenewalKind::poisson) throw ConfigError(where, "closed-form requires a poisson renewal");
      return;
    case AnalyticMethod::anomalous_limit:
      if (k != RenewalKind::mittag_leffler || relaxed)
        throw ConfigError(where, "anomalous-limit requires a mittag-leffler renewal and no relaxation");
      return;
    case AnalyticMethod::relaxed_anomalous:
      if (k != RenewalKind::mittag_leffler || !relaxed)
        throw ConfigError(where, "relaxed-anomalous requires a mittag-leffler renewal and relaxation");
      return;
  }
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (points == 1) return {min};
  return log ? log_grid(min, max, points) : linear_grid(min, max, points);
}

bool ExperimentConfig::uses_system() const {
  return run == RunKind::survival || run == RunKind::tz_scan;
}
bool ExperimentConfig::uses_renewal() const { return run == RunKind::survival || run == RunKind::counts; }
bool ExperimentConfig::uses_engines() const { return uses_renewal(); }
bool ExperimentConfig::uses_mc() const {
  if (!uses_engines()) return false;
  for (const auto& e : engines)
    if (e == "mc") return true;
  return false;
}

TwoLevelParams ExperimentConfig::two_level() const { return TwoLevelParams(epsilon * v, v); }

std::optional<RelaxationParams> ExperimentConfig::relaxation() const {
  if (!w_d) return std::nullopt;
  return RelaxationParams(*w_d * v, *w_p * v);
}

SystemModel ExperimentConfig::model() const { return SystemModel::two_level(two_level(), relaxation()); }

RenewalModel ExperimentConfig::renewal_model() const {
  if (!renewal) throw ValidationError("configuration has no renewal section");
  switch (renewal->kind) {
    case RenewalKind::poisson: return Poisson(renewal->w_r * v);
    case RenewalKind::equidistant: return Equidistant(renewal->t_r / v);
    case RenewalKind::mittag_leffler: return MittagLeffler(renewal->alpha, renewal->w_r * v);
  }
  throw ValidationError("unknown renewal kind");
}

McConfig ExperimentConfig::mc_config(std::vector<double> physical_times) const {
  McConfig m;
  m.n_trajectories = mc.trajectories;
  m.master_seed = mc.seed;
  m.estimator = mc.estimator;
  m.direct_p1 = mc.direct_p1;
  m.times = std::move(physical_times);
  return m;
}

ExperimentConfig parse_config(const json& doc) {
  Section root(doc, "");
  ExperimentConfig c;
  c.run = parse_run(root.text("run"));

  if (c.uses_system()) {
    Section s = root.object("system");
    c.v = s.positive("v", 1.0);
    c.epsilon = s.number("epsilon", 0.0);
    if (!(c.epsilon >= 0.0)) throw ConfigError(s.at("epsilon"), "must be >= 0");
    if (s.has("relaxation")) {
      Section r = s.object("relaxation");
      c.w_d = r.number("w_d");
      c.w_p = r.number("w_p");
      if (!(*c.w_d >= 0.0)) throw ConfigError(r.at("w_d"), "must be >= 0");
      if (!(*c.w_p >= 0.5 * *c.w_d)) throw ConfigError(r.at("w_p"), "must be >= w_d / 2 (positivity)");
      r.finish();
    }
    s.finish();
  }

  if (c.uses_renewal()) c.renewal = parse_renewal(root.object("renewal"));

  if (c.uses_engines()) {
    c.engines = root.strings("engines", c.engines);
    if (c.engines.empty()) throw ConfigError("/engines", "at least one engine is required");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < c.engines.size(); ++i) {
      const auto& e = c.engines[i];
      if (e != "analytic" && e != "mc")
        throw ConfigError("/engines/" + std::to_string(i), "expected \"analytic\" or \"mc\"");
      if (!seen.insert(e).second) throw ConfigError("/engines/" + std::to_string(i), "duplicate engine");
    }
    if (c.run == RunKind::survival && root.has("analytic")) {
      Section a = root.object("analytic");
      c.method = parse_method(a.text("method", "auto"), a.at("method"));
      a.finish();
    }
    if (root.has("mc")) {
      Section m = root.object("mc");
      c.mc.trajectories = m.count("trajectories", c.mc.trajectories, 1);
      c.mc.seed = m.count("seed", c.mc.seed, 0);
      try {
        c.mc.estimator = parse_estimator(m.text("estimator", to_string(c.mc.estimator)));
      } catch (const ValidationError& e) {
        throw ConfigError(m.at("estimator"), "expected \"product\" or \"bernoulli\"");
      }
      c.mc.direct_p1 = m.flag("direct_p1", c.mc.direct_p1);
      m.finish();
    }
  }
  if (c.run == RunKind::survival) check_method(c);

  if (c.run == RunKind::survival || c.run == RunKind::tz_scan) {
    Section g = root.object("grids");
    if (c.run == RunKind::survival)
      c.time_grid = parse_grid(g.object("time"), false);
    else
      c.w_r_grid = parse_grid(g.object("w_r"), true);
    g.finish();
  }

  if (c.run == RunKind::counts) {
    Section s = root.object("counts");
    c.count_time = s.positive("t");
    c.count_max = static_cast<int>(s.count("n_max", static_cast<std::uint64_t>(kDefaultMaxCount), 0));
    if (c.count_max > 100000) throw ConfigError(s.at("n_max"), "at most 100000");
    s.finish();
  }

  if (uses_inversion(c) && root.has("inversion")) c.inversion = parse_inversion(root.object("inversion"));

  if (c.run == RunKind::validate && root.has("validate")) {
    Section s = root.object("validate");
    c.filter = s.text("filter", "");
    s.finish();
  }

  if (root.has("output")) {
    Section o = root.object("output");
    c.output_dir = o.text("dir", c.output_dir);
    if (c.output_dir.empty()) throw ConfigError(o.at("dir"), "must not be empty");
    const auto formats = o.strings("formats", {"csv", "svg"});
    c.csv = c.svg = false;
    for (std::size_t i = 0; i < formats.size(); ++i) {
      if (formats[i] == "csv")
        c.csv = true;
      else if (formats[i] == "svg")
        c.svg = true;
      else
        throw ConfigError(o.at("formats") + "/" + std::to_string(i), "expected \"csv\" or \"svg\"");
    }
    if (c.svg && !c.csv) throw ConfigError(o.at("formats"), "svg plots are drawn from the csv files; add \"csv\"");
    o.finish();
  }
  root.finish();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json to_json(const ExperimentConfig& c) {
  json j{{"run", to_string(c.run)}};
  if (c.uses_system()) {
    json s{{"v", c.v}, {"epsilon", c.epsilon}};
    if (c.w_d) s["relaxation"] = {{"w_d", *c.w_d}, {"w_p", *c.w_p}};
    j["system"] = s;
  }
  if (c.uses_renewal()) j["renewal"] = renewal_json(*c.renewal);
  if (c.uses_engines()) {
    j["engines"] = c.engines;
    if (c.run == RunKind::survival) j["analytic"] = {{"method", to_string(c.method)}};
    j["mc"] = {{"trajectories", c.mc.trajectories},
               {"seed", c.mc.seed},
               {"estimator", to_string(c.mc.estimator)},
               {"direct_p1", c.mc.direct_p1}};
  }
  if (c.time_grid) j["grids"] = {{"time", grid_json(*c.time_grid)}};
  if (c.w_r_grid) j["grids"] = {{"w_r", grid_json(*c.w_r_grid)}};
  if (c.run == RunKind::counts) j["counts"] = {{"t", c.count_time}, {"n_max", c.count_max}};
  if (uses_inversion(c)) j["inversion"] = inversion_json(c.inversion);
  if (c.run == RunKind::validate) j["validate"] = {{"filter", c.filter}};
  json formats = json::array();
  if (c.csv) formats.push_back("csv");
  if (c.svg) formats.push_back("svg");
  j["output"] = {{"dir", c.output_dir}, {"formats", formats}};
  return j;
}

ExperimentConfig preset_config(RunKind kind) {
  ExperimentConfig c;
  c.run = kind;
  c.output_dir = to_string(kind);
  return c;
}

}  // namespace zeno
