#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esdp/cli.hpp"

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("ESDP_OUT_DIR")) return env;
  return "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online dispatching of multi-server jobs on a port/server "
               "bipartite graph with bandit-learned channel valuations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_out_dir();
  std::vector<std::string> overrides;
  std::string seed, reps, policies;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    cmd->add_option("--set", overrides, "override, repeatable: key=value");
    cmd->add_option("--out", out_dir,
                    "output directory (default: $ESDP_OUT_DIR or ./out)");
    cmd->add_option("--seed", seed, "shorthand for --set seed=...");
    cmd->add_option("--reps", reps, "shorthand for --set replications=...");
    cmd->add_option("--policies", policies, "shorthand for --set policies=...");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run a replicated experiment");
  add_common(run_cmd);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a parameter sweep from a sweep file");
  std::string sweep_path;
  sweep_cmd->add_option("sweep-file", sweep_path, "sweep spec file")->required();
  sweep_cmd->add_option("--out", out_dir,
                        "output directory (default: $ESDP_OUT_DIR or ./out)");

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "lint a config file and exit");
  validate_cmd->add_option("config-file", config_path, "config file")->required();

  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check",
      "check the budgeted DP against exhaustive enumeration on random instances");
  int oracle_n = 200;
  std::string oracle_seed = "7";
  oracle_cmd->add_option("--n", oracle_n, "number of random instances");
  oracle_cmd->add_option("--seed", oracle_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run_cmd)) {
      esdp::SimConfig cfg;
      if (!config_path.empty()) cfg = esdp::load_config(config_path);
      if (!seed.empty()) overrides.push_back("seed=" + seed);
      if (!reps.empty()) overrides.push_back("replications=" + reps);
      if (!policies.empty()) overrides.push_back("policies=" + policies);
      esdp::apply_overrides(cfg, overrides);
      cfg.validate();
      esdp::cmd_run(cfg, out_dir, std::cout);
      return 0;
    }
    if (app.got_subcommand(sweep_cmd)) {
      esdp::cmd_sweep(esdp::load_sweep_spec(sweep_path), out_dir, std::cout);
      return 0;
    }
    if (app.got_subcommand(validate_cmd)) {
      esdp::SimConfig cfg = esdp::load_config(config_path);
      cfg.validate();
      std::cout << "OK\n" << esdp::serialize_config(cfg);
      return 0;
    }
    if (app.got_subcommand(oracle_cmd)) {
      std::uint64_t s = std::stoull(oracle_seed);
      return esdp::cmd_oracle_check(oracle_n, s, std::cout) ? 0 : 1;
    }
  } catch (const esdp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const esdp::SimError& e) {
    std::cerr << "constraint tripwire: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
