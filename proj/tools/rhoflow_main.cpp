#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "rhoflow/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rhoflow: nonlinear density-matrix dynamics scenario runner"};
  app.set_version_flag("--version", std::string("rhoflow ") + rhoflow::kToolVersion);

  bool list_scenarios = false;
  app.add_flag("--list-scenarios", list_scenarios, "List scenario names and exit");

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 12345;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute a scenario config");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "Seed for randomized audit scenarios");

  CLI11_PARSE(app, argc, argv);

  if (list_scenarios) {
    for (const auto& name : rhoflow::scenario_names()) std::printf("%s\n", name.c_str());
    return 0;
  }
  if (!run_cmd->parsed()) {
    std::fputs(app.help().c_str(), stdout);
    return 2;
  }

  try {
    const rhoflow::ExperimentConfig cfg = rhoflow::load_config(config_path);
    const std::string dir = out_dir.empty() ? cfg.output.directory : out_dir;
    const rhoflow::RunReport report = rhoflow::run(cfg, dir, seed);

    for (const auto& c : report.checks) {
      std::printf("%-28s %-4s  value=%.6g  threshold %s %.6g\n", c.name.c_str(),
                  c.pass ? "ok" : "FAIL", c.value, c.at_least ? ">=" : "<=",
                  c.threshold);
    }
    for (const auto& o : report.outputs) std::printf("wrote %s\n", o.c_str());
    std::printf("%s: %s\n", report.scenario.c_str(),
                report.verdict() ? "pass" : "fail");
    return report.verdict() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
