#include "echelon/cli.hpp"

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "echelon/runner.hpp"
#include "echelon/version.hpp"

namespace echelon {

namespace {

struct CommandArgs {
  std::string scenario_path;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out_dir;
  bool exhaustive = false;
};

void add_common_options(CLI::App* cmd, CommandArgs& args) {
  cmd->add_option("--scenario", args.scenario_path, "Scenario file (.scn, JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
  cmd->add_option("--workers", args.workers, "Parallel workers")->check(CLI::Range(1, 256));
  cmd->add_option("--out", args.out_dir,
                  "Output directory (default: $ECHELON_OUT_DIR, else ./echelon-out)");
}

RunOptions make_options(const CLI::App* cmd, const CommandArgs& args) {
  RunOptions options;
  if (!args.out_dir.empty()) {
    options.out_dir = args.out_dir;
  } else if (const char* env = std::getenv("ECHELON_OUT_DIR"); env != nullptr && *env != '\0') {
    options.out_dir = env;
  }
  if (cmd->count("--seed") > 0) options.seed_override = args.seed;
  options.workers = args.workers;
  options.exhaustive = args.exhaustive;
  return options;
}

void report(const RunOutput& output, const RunOptions& options) {
  for (const auto& file : output.files) {
    std::cout << "wrote " << (options.out_dir / file).string() << "\n";
  }
  std::cout << "wrote " << (options.out_dir / output.manifest_file).string() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"deterministic simulator and optimizer for decision overload in hierarchies"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommandArgs args;
  CLI::App* dyad_sweep = app.add_subcommand(
      "dyad-sweep", "Classify dyad stability over a (confusion gain, order rate) grid");
  add_common_options(dyad_sweep, args);

  CLI::App* net_sim = app.add_subcommand(
      "net-sim", "Run one network simulation (timeseries or propagation scenario)");
  add_common_options(net_sim, args);

  CLI::App* net_sweep = app.add_subcommand(
      "net-sweep", "Sweep a network to a collapse curve or stability envelope");
  add_common_options(net_sweep, args);

  CLI::App* team_sim =
      app.add_subcommand("team-sim", "Simulate a team under a fixed information structure");
  add_common_options(team_sim, args);

  CLI::App* team_opt =
      app.add_subcommand("team-opt", "Search for a high-fitness information structure");
  add_common_options(team_opt, args);
  team_opt->add_flag("--exhaustive", args.exhaustive,
                     "Enumerate the whole structure space instead of running the GA");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const CLI::App* active = dyad_sweep->parsed()   ? dyad_sweep
                             : net_sim->parsed()    ? net_sim
                             : net_sweep->parsed()  ? net_sweep
                             : team_sim->parsed()   ? team_sim
                                                    : team_opt;
    const Scenario scenario = load_scenario(args.scenario_path);
    const RunOptions options = make_options(active, args);

    RunOutput output;
    if (dyad_sweep->parsed()) {
      output = run_dyad_sweep(scenario, options);
    } else if (net_sim->parsed()) {
      output = run_net_sim(scenario, options);
    } else if (net_sweep->parsed()) {
      output = run_net_sweep(scenario, options);
    } else if (team_sim->parsed()) {
      output = run_team_sim(scenario, options);
    } else {
      output = run_team_opt(scenario, options);
    }
    report(output, options);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace echelon
