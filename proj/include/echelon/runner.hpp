#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "echelon/scenario.hpp"

namespace echelon {

struct RunOptions {
  std::filesystem::path out_dir = "echelon-out";
  std::optional<std::uint64_t> seed_override;  // beats the scenario seed
  unsigned workers = 1;
  bool exhaustive = false;  // team-opt only: force the enumeration oracle
};

// File names are relative to out_dir and prefixed with the scenario name.
// Data files are byte-identical across re-runs with the same scenario and
// seed at any worker count; the manifest carries wall-clock timestamps and
// is the one file excluded from that guarantee.
struct RunOutput {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest_file;
};

// Each runner checks that the scenario's model (and, for network scenarios,
// the experiment kind) fits the command, computes everything up front, and
// only then writes files. A failed run writes nothing.
RunOutput run_dyad_sweep(const Scenario& scenario, const RunOptions& options);
RunOutput run_net_sim(const Scenario& scenario, const RunOptions& options);
RunOutput run_net_sweep(const Scenario& scenario, const RunOptions& options);
RunOutput run_team_sim(const Scenario& scenario, const RunOptions& options);
RunOutput run_team_opt(const Scenario& scenario, const RunOptions& options);

}  // namespace echelon
