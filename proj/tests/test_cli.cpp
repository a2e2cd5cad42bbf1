#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zeno/acceptance.hpp"
#include "zeno/config.hpp"
#include "zeno/experiment.hpp"
#include "zeno/output.hpp"

using namespace zeno;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zeno_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json minimal_survival() {
  return json::parse(R"({
    "run": "survival",
    "system": {"epsilon": 1.0},
    "renewal": {"model": "poisson", "w_r": 2.0},
    "grids": {"time": {"min": 0, "max": 4, "points": 3}}
  })");
}

std::string pointer_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZENO_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("numbers are written in shortest round-trip form") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, 0.0, -2.5}) {
    const std::string s = format_number(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(5.0) == "5");
}

TEST_CASE("csv write and read") {
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  CsvTable t;
  t.header = {{"seed", "7"}, {"note", "two\nlines"}};
  t.columns = {"t", "value", "stderr"};
  t.rows = {{0.0, 1.0, std::nullopt}, {0.5, 0.25, 0.01}};
  write_csv((dir / "a.csv").string(), t);
  CHECK(slurp(dir / "a.csv") == "# seed=7\n# note=two lines\nt,value,stderr\n0,1,\n0.5,0.25,0.01\n");
  const CsvTable back = read_csv((dir / "a.csv").string());
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(back.header_value("seed") == "7");
  CHECK_THROWS_AS(back.column("missing"), ValidationError);
}

TEST_CASE("minimal survival config gives one csv with a header and three rows") {
  auto doc = minimal_survival();
  doc["output"] = {{"dir", scratch("minimal").string()}, {"formats", {"csv"}}};
  const auto cfg = parse_config(doc);
  const auto result = run_experiment(cfg);
  CHECK(result.files == std::vector<std::string>{"summary.json", "survival_analytic.csv"});

  const CsvTable t = read_csv(cfg.output_dir + "/survival_analytic.csv");
  CHECK(t.columns == std::vector<std::string>{"t", "value", "stderr"});
  REQUIRE(t.rows.size() == 3);
  for (const auto& row : t.rows) CHECK_FALSE(row[2].has_value());
  CHECK(*t.rows[0][1] == 1.0);
  CHECK(*t.rows[1][0] == 2.0);
  CHECK(t.header_value("zeno_version") == zeno_version());
  CHECK(t.header_value("seed") == "none");

  // The echoed config is complete: it parses back to the same canonical form.
  auto echo = json::parse(*t.header_value("config"));
  echo["output"] = to_json(cfg)["output"];
  CHECK(to_json(parse_config(echo)) == to_json(cfg));
}

TEST_CASE("canonical form round-trips") {
  std::vector<json> docs{minimal_survival(), json::parse(R"({"run": "fig1"})"), json::parse(R"({"run": "validate"})")};
  docs.push_back(json::parse(R"({
    "run": "survival", "system": {"v": 2, "epsilon": 0.5, "relaxation": {"w_d": 0.1, "w_p": 0.2}},
    "renewal": {"model": "mittag-leffler", "w_r": 3, "alpha": 0.6},
    "grids": {"time": {"scale": "log", "min": 0.1, "max": 10, "points": 5}},
    "engines": ["mc", "analytic"], "analytic": {"method": "scalar"},
    "mc": {"trajectories": 1000, "seed": 18446744073709551615, "estimator": "bernoulli", "direct_p1": true},
    "inversion": {"terms": 32, "period_factor": 2.5},
    "output": {"dir": "x", "formats": ["csv"]}})"));
  docs.push_back(json::parse(R"({"run": "tz-scan", "system": {"epsilon": 2.5},
    "grids": {"w_r": {"scale": "log", "min": 0.001, "max": 1000, "points": 200}}})"));
  docs.push_back(json::parse(R"({"run": "counts", "renewal": {"model": "equidistant", "t_r": 0.5},
    "counts": {"t": 2}, "engines": ["analytic"]})"));
  for (const auto& d : docs) {
    const auto c = parse_config(d);
    const json canonical = to_json(c);
    CHECK(to_json(parse_config(canonical)) == canonical);
    CHECK(to_json(parse_config_text(canonical.dump(2))) == canonical);
  }
  const auto c = parse_config(docs[3]);
  CHECK(c.mc.seed == 18446744073709551615ull);
  CHECK(c.inversion.terms == 32);
  CHECK(c.inversion.damping == InversionSettings{}.damping);
}

TEST_CASE("schema errors carry JSON pointers") {
  auto with = [](const std::string& ptr, json value) {
    json d = minimal_survival();
    d[json::json_pointer(ptr)] = std::move(value);
    return d;
  };
  auto without = [](const std::string& ptr) {
    json d = minimal_survival();
    d[json::json_pointer(ptr).parent_pointer()].erase(json::json_pointer(ptr).back());
    return d;
  };
  CHECK(pointer_of(without("/renewal/w_r")) == "/renewal/w_r");
  CHECK(pointer_of(with("/renewal/w_r", -1)) == "/renewal/w_r");
  CHECK(pointer_of(with("/renewal/w_r", "fast")) == "/renewal/w_r");
  CHECK(pointer_of(with("/renewal/model", "gamma")) == "/renewal/model");
  CHECK(pointer_of(with("/system/epsilom", 1.0)) == "/system/epsilom");
  CHECK(pointer_of(with("/system/v", 0.0)) == "/system/v");
  CHECK(pointer_of(with("/grids/time/max", 0.0)) == "/grids/time/max");
  CHECK(pointer_of(with("/grids/time/scale", "log")) == "/grids/time/min");
  CHECK(pointer_of(with("/grids/time/points", 2.5)) == "/grids/time/points");
  CHECK(pointer_of(with("/engines", json{"analytic", "gpu"})) == "/engines/1");
  CHECK(pointer_of(with("/engines", json::array())) == "/engines");
  CHECK(pointer_of(with("/mc", {{"trajectories", 0}})) == "/mc/trajectories");
  CHECK(pointer_of(with("/mc", {{"estimator", "coin"}})) == "/mc/estimator");
  CHECK(pointer_of(with("/analytic", {{"method", "anomalous-limit"}})) == "/analytic/method");
  CHECK(pointer_of(with("/system/relaxation", {{"w_d", 1.0}, {"w_p", 0.4}})) == "/system/relaxation/w_p");
  CHECK(pointer_of(with("/output", {{"formats", {"svg"}}})) == "/output/formats");
  CHECK(pointer_of(with("/inversion", {{"terms", 4}})) == "/inversion/terms");
  CHECK(pointer_of(with("/run", "plot")) == "/run");
  CHECK(pointer_of(with("/counts", {{"t", 1.0}})) == "/counts");
  CHECK(pointer_of(without("/grids")) == "/grids");
  CHECK(pointer_of(json::parse(R"({"run": "tz-scan", "system": {}, "renewal": {"model": "poisson", "w_r": 1},
                                   "grids": {"w_r": {"min": 1, "max": 2, "points": 2}}})")) == "/renewal");
  CHECK(pointer_of(json::array()) == "");

  try {
    parse_config_text("{\"run\": ");
    FAIL("accepted malformed JSON");
  } catch (const ConfigError& e) {
    CHECK(e.pointer().empty());
    CHECK(std::string(e.what()).find("malformed JSON") != std::string::npos);
  }
}

TEST_CASE("quantities are in units of v") {
  // Doubling v with dimensionless inputs fixed must reproduce the same
  // dimensionless curve p(t v).
  json a = minimal_survival();
  a["grids"]["time"] = {{"min", 0.0}, {"max", 6.0}, {"points", 13}};
  a["system"]["relaxation"] = {{"w_d", 0.2}, {"w_p", 0.3}};
  json b = a;
  b["system"]["v"] = 2.5;
  a["output"] = {{"dir", scratch("v1").string()}, {"formats", {"csv"}}};
  b["output"] = {{"dir", scratch("v2").string()}, {"formats", {"csv"}}};
  run_experiment(parse_config(a));
  run_experiment(parse_config(b));
  const auto ta = read_csv(a["output"]["dir"].get<std::string>() + "/survival_analytic.csv");
  const auto tb = read_csv(b["output"]["dir"].get<std::string>() + "/survival_analytic.csv");
  REQUIRE(ta.rows.size() == tb.rows.size());
  for (std::size_t i = 0; i < ta.rows.size(); ++i) {
    CHECK(*ta.rows[i][0] == *tb.rows[i][0]);
    CHECK(std::abs(*ta.rows[i][1] - *tb.rows[i][1]) <= 1e-12);
  }

  const auto cfg = parse_config(b);
  CHECK(cfg.two_level().v() == 2.5);
  CHECK(cfg.two_level().epsilon() == 2.5);
  CHECK(std::get<Poisson>(cfg.renewal_model()).rate() == 5.0);
  CHECK(cfg.relaxation()->w_p() == doctest::Approx(0.75));
}

TEST_CASE("summary config reproduces the run byte for byte") {
  json doc = minimal_survival();
  doc["engines"] = {"analytic", "mc"};
  doc["mc"] = {{"trajectories", 3000}, {"seed", 42}};
  doc["grids"]["time"]["points"] = 21;
  doc["output"] = {{"dir", scratch("replay").string()}};
  const auto first = run_experiment(parse_config(doc));
  std::map<std::string, std::string> bytes;
  for (const auto& f : first.files) bytes[f] = slurp(fs::path(doc["output"]["dir"].get<std::string>()) / f);

  const auto summary = json::parse(bytes.at("summary.json"));
  const auto second = run_experiment(parse_config(summary.at("config")));
  CHECK(second.files == first.files);
  for (const auto& f : second.files) CHECK(slurp(fs::path(doc["output"]["dir"].get<std::string>()) / f) == bytes.at(f));

  const CsvTable mc = read_csv(doc["output"]["dir"].get<std::string>() + "/survival_mc.csv");
  CHECK(mc.header_value("seed") == "42");
  CHECK(mc.rows[5][2].has_value());
  CHECK(summary["results"]["comparison"]["agree_within_max_3se_0.01"] == true);
}

TEST_CASE("tz-scan run") {
  const auto cfg = parse_config(json{{"run", "tz-scan"},
                                     {"system", {{"epsilon", 1.0}}},
                                     {"grids", {{"w_r", {{"scale", "log"}, {"min", 0.01}, {"max", 100}, {"points", 101}}}}},
                                     {"output", {{"dir", scratch("tz").string()}}}});
  const auto r = run_experiment(cfg);
  const CsvTable t = read_csv(cfg.output_dir + "/tz_scan.csv");
  CHECK(t.columns == std::vector<std::string>{"w_r", "t_Z"});
  CHECK(t.rows.size() == 101);
  // t_Z = 1/w_r + (w_r^2 + 4 eps^2) / (2 w_r v^2) at eps = v = 1
  for (const auto& row : t.rows) {
    const double w = *row[0];
    CHECK(*row[1] == doctest::Approx(1.0 / w + (w * w + 4.0) / (2.0 * w)).epsilon(1e-12));
  }
  const double step = std::log(10.0) / 25.0;
  CHECK(std::abs(std::log(r.summary["results"]["argmin_w_r"].get<double>() / std::sqrt(6.0))) <= step);
  CHECK(r.summary["results"]["predicted_argmin_w_r"].get<double>() == doctest::Approx(std::sqrt(6.0)));
  CHECK(fs::exists(cfg.output_dir + "/tz_scan.svg"));
}

TEST_CASE("counts run") {
  const auto cfg = parse_config(json{{"run", "counts"},
                                     {"renewal", {{"model", "poisson"}, {"w_r", 1.0}}},
                                     {"counts", {{"t", 2.0}, {"n_max", 30}}},
                                     {"engines", {"analytic", "mc"}},
                                     {"mc", {{"trajectories", 20000}}},
                                     {"output", {{"dir", scratch("counts").string()}}}});
  const auto r = run_experiment(cfg);
  const CsvTable a = read_csv(cfg.output_dir + "/counts_analytic.csv");
  const CsvTable m = read_csv(cfg.output_dir + "/counts_mc.csv");
  CHECK(a.columns == std::vector<std::string>{"n", "probability", "stderr"});
  CHECK(a.rows.size() == 31);
  CHECK(*a.rows[2][1] == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-6));
  double mass = 0.0;
  for (const auto& row : m.rows) mass += *row[1];
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.summary["results"]["analytic"]["mean_count"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("fig1 preset locates the minimum near 1/sqrt(27)") {
  auto cfg = preset_config(RunKind::fig1);
  cfg.output_dir = scratch("fig1").string();
  const auto r = run_experiment(cfg);
  int count = 0;
  for (const auto& s : r.summary["results"]["series"]) {
    ++count;
    CHECK(s["non_monotonic"] == true);
    if (s["epsilon_bar"] == 2.5)
      CHECK(std::abs(s["argmin_tau_r"].get<double>() * std::sqrt(27.0) - 1.0) <= 0.2);
  }
  CHECK(count == 8);
  CHECK(fs::exists(cfg.output_dir + "/fig1a.svg"));
  CHECK(fs::exists(cfg.output_dir + "/fig1b.svg"));
  const CsvTable t = read_csv(cfg.output_dir + "/fig1_tau5_eps2.5.csv");
  CHECK(t.rows.size() == 161);
  CHECK(*t.rows.front()[0] == doctest::Approx(0.01));
}

TEST_CASE("svg is drawn from the csv") {
  const auto dir = scratch("svg");
  fs::create_directories(dir);
  CsvTable t;
  t.columns = {"t", "value", "stderr"};
  t.rows = {{0.0, 1.0, std::nullopt}, {1.0, 0.5, 0.1}, {2.0, 0.0, std::nullopt}, {3.0, std::nullopt, std::nullopt}};
  write_csv((dir / "c.csv").string(), t);
  PlotSpec spec{"title <x>", "t", "p", false, true, {{"curve", (dir / "c.csv").string(), "t", "value", "stderr", true, false}}};
  write_svg((dir / "c.svg").string(), spec);
  const std::string svg = slurp(dir / "c.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("title &lt;x&gt;") != std::string::npos);
  // The zero and the empty value cannot appear on a log axis.
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  CHECK(circles == 3);  // two points and the legend marker
  spec.series[0].y_column = "nope";
  CHECK_THROWS_AS(write_svg((dir / "d.svg").string(), spec), ValidationError);
}

TEST_CASE("acceptance criteria registry") {
  const auto& all = acceptance_criteria();
  REQUIRE(all.size() == 10);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == static_cast<int>(i) + 1);
  CHECK(criterion_matches(all[2], "3"));
  CHECK(criterion_matches(all[2], "zeno-limit"));
  CHECK_FALSE(criterion_matches(all[2], "fig"));
  const auto r = run_acceptance("zeno-limit");
  REQUIRE(r.size() == 1);
  CHECK(r[0].passed);
  CHECK(format_result(r[0]).rfind("PASS 3 zeno-limit: ", 0) == 0);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("exit");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const json& doc) {
    std::ofstream((dir / name).string()) << doc.dump();
    return (dir / name).string();
  };
  const std::string out = " --out " + (dir / "out").string();
  const auto good = write("good.json", minimal_survival());
  CHECK(run_cli("run " + good + out) == 0);
  CHECK(run_cli("run " + good + out + " --engines analytic,mc --seed 5") == 0);
  CHECK(read_csv((dir / "out" / "survival_mc.csv").string()).header_value("seed") == "5");
  CHECK(run_cli("run " + good + out + " --engines gpu") == 2);
  CHECK(run_cli("run " + (dir / "missing.json").string()) == 2);

  json bad = minimal_survival();
  bad["renewal"]["alpha"] = 0.5;
  CHECK(run_cli("run " + write("bad.json", bad) + out) == 2);

  json strict = minimal_survival();
  strict["inversion"] = {{"max_error", 1e-300}};
  CHECK(run_cli("run " + write("strict.json", strict) + out) == 3);

  const int threads = std::system(("ZENO_THREADS=none " + std::string(ZENO_BINARY) + " run " + good + out +
                                    " --engines mc >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(threads) == 2);

  CHECK(run_cli("validate --filter zeno-limit") == 0);
  CHECK(run_cli("validate --filter fig2b") == 4);
  CHECK(run_cli("validate --filter no-such-criterion") == 2);
}
