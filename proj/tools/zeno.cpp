// zeno: configuration-driven runner for the measurement-averaged survival engines.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zeno/acceptance.hpp"
#include "zeno/config.hpp"
#include "zeno/experiment.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 2, kNumericalError = 3, kValidationFailure = 4 };

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int execute(zeno::ExperimentConfig config) {
  const auto result = zeno::run_experiment(config);
  for (const auto& f : result.files) std::cout << config.output_dir << "/" << f << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic quantum Zeno simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, engines, filter;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  auto* run_out = run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* run_engines = run->add_option("--engines", engines, "Comma-separated engines: analytic,mc");
  auto* run_seed = run->add_option("--seed", seed, "Monte Carlo master seed (overrides mc.seed)");

  auto* validate = app.add_subcommand("validate", "Run the acceptance suite");
  validate->add_option("--filter", filter, "Criterion id or name substring");

  auto* fig1 = app.add_subcommand("fig1", "Survival at fixed tau against the measurement period");
  auto* fig1_out = fig1->add_option("--out", out_dir, "Output directory");
  auto* fig2 = app.add_subcommand("fig2", "Anomalous-limit survival curves and fits");
  auto* fig2_out = fig2->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    zeno::ExperimentConfig config;
    if (run->parsed()) {
      config = zeno::load_config(config_path);
      if (run_engines->count() > 0) {
        if (!config.uses_engines()) throw zeno::ConfigError("/engines", "--engines does not apply to this run kind");
        nlohmann::json doc = zeno::to_json(config);
        doc["engines"] = split_list(engines);
        config = zeno::parse_config(doc);
      }
      if (run_seed->count() > 0) {
        if (!config.uses_engines()) throw zeno::ConfigError("/mc/seed", "--seed does not apply to this run kind");
        config.mc.seed = seed;
      }
      if (run_out->count() > 0) config.output_dir = out_dir;
    } else if (validate->parsed()) {
      bool any = false;
      for (const auto& c : zeno::acceptance_criteria()) any = any || zeno::criterion_matches(c, filter);
      if (!any) throw zeno::ConfigError("/validate/filter", "no criterion matches '" + filter + "'");
      const auto results = zeno::run_acceptance(filter, &std::cout);
      bool all = true;
      for (const auto& r : results) all = all && r.passed;
      return all ? kOk : kValidationFailure;
    } else {
      const bool first = fig1->parsed();
      config = zeno::preset_config(first ? zeno::RunKind::fig1 : zeno::RunKind::fig2);
      if ((first ? fig1_out : fig2_out)->count() > 0) config.output_dir = out_dir;
    }
    return execute(config);
  } catch (const zeno::ValidationError& e) {
    std::cerr << "zeno: configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const zeno::NumericalError& e) {
    std::cerr << "zeno: numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "zeno: " << e.what() << "\n";
    return kNumericalError;
  }
}
