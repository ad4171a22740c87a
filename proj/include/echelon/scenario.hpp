#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echelon/dyad.hpp"
#include "echelon/netsim.hpp"
#include "echelon/optimize.hpp"
#include "echelon/team.hpp"

namespace echelon {

// Inclusive linear grid, expanded to `count` points. count = 1 pins min and
// requires max = min.
struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

std::vector<double> expand(const GridSpec& grid);

struct DyadScenario {
  SCurve curve;
  double saturation_ceiling = 1e6;
  DyadSweepConfig sweep;
  GridSpec k_grid;
  GridSpec u_grid;
};

enum class NetExperiment { timeseries, collapse, envelope, propagation };

struct NetworkScenario {
  NetExperiment experiment = NetExperiment::timeseries;
  std::vector<NodeSpec> nodes;
  NetRunParams params;
  double root_rate = 0.0;      // all but collapse
  GridSpec rate_grid;          // collapse
  GridSpec sum_grid;           // envelope
  GridSpec diff_grid;          // envelope
  std::string left_leaf;       // envelope
  std::string right_leaf;      // envelope
  std::string stimulated_leaf; // propagation
  double stimulus = 0.0;       // propagation
};

struct TeamScenario {
  TeamInstance instance;
  std::optional<InformationStructure> structure;  // required by team-sim
  GaConfig ga;                                    // seed filled in by the runner
};

// One experiment definition, loaded from a `.scn` JSON file. Exactly one of
// the model blocks is populated, matching `model`. Unknown keys anywhere in
// the file are rejected.
struct Scenario {
  std::string name;
  std::string model;  // dyad | network | team
  std::string notes;
  std::uint64_t seed = 0;
  std::optional<DyadScenario> dyad;
  std::optional<NetworkScenario> network;
  std::optional<TeamScenario> team;
  std::uint64_t digest = 0;  // FNV-1a over the raw file bytes
  std::string source_path;
};

// Throws std::invalid_argument with a path-like message ("network.nodes[2]:
// ...") on any schema or domain violation.
Scenario parse_scenario(const std::string& text, const std::string& source_path = "");
Scenario load_scenario(const std::string& path);

}  // namespace echelon
