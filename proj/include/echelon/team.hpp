#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "echelon/tradeoff.hpp"

namespace echelon {

struct TeamAgent {
  std::string id;
  double interaction_load_weight = 0.0;  // time pressure added per interaction unit
  SCurve pressure_curve;                 // default accuracy curve over time pressure
  std::map<std::string, SCurve> decision_curves;  // per-decision overrides
};

struct TeamDecision {
  std::string id;
  std::vector<std::string> dependencies;  // decisions whose outcome must be known
};

enum class ShareMode { push, pull };

struct SharingEdge {
  std::string decision;
  std::string recipient;  // agent id
  ShareMode mode = ShareMode::push;
};

// Who decides what, and how outcomes travel. responsibility must cover every
// decision exactly once; edges never deliver a decision to its own owner.
struct InformationStructure {
  std::map<std::string, std::string> responsibility;  // decision -> agent
  std::vector<SharingEdge> sharing;
};

struct ForecastSample {
  double time_availability = 1.0;  // > 0, inverse of exogenous time pressure
  double discriminability = 1.0;   // in (0,1]
  int n_options = 2;               // >= 2
};

struct TeamInstance {
  std::vector<TeamAgent> agents;
  std::vector<TeamDecision> decisions;
  std::map<std::string, std::vector<ForecastSample>> forecasts;  // per decision
  std::map<std::string, double> weights;  // empty: uniform
  int horizon = 0;                        // steps; forecasts must cover it
  double staleness_factor = 0.95;         // accuracy multiplier per pull-delivered dependency
};

void validate_instance(const TeamInstance& instance);
void validate_structure(const TeamInstance& instance, const InformationStructure& structure);

// True iff the owner of `decision` can see every dependency: it either owns
// the dependency or receives it through a sharing edge (either mode).
bool dependency_satisfied(const TeamInstance& instance, const InformationStructure& structure,
                          const std::string& decision);

// Time pressure an agent accrues from the structure itself: pushes received,
// pull requests served, and decisions owned beyond the first, all scaled by
// the agent's interaction_load_weight. Constant over the run.
double interaction_pressure(const TeamInstance& instance, const InformationStructure& structure,
                            const std::string& agent);

struct TeamRunResult {
  std::vector<std::string> decision_ids;
  std::vector<std::vector<double>> accuracy;  // [decision][step], in [0,1]
  std::map<std::string, std::vector<double>> agent_load;  // time pressure per step
  double fitness = 0.0;
};

// Runs the accuracy model for every decision over the horizon under the
// given structure. A decision whose dependencies are not met scores zero
// for the whole run. Each pull-delivered dependency multiplies the owner's
// accuracy on that decision by the staleness factor.
TeamRunResult simulate_team(const TeamInstance& instance, const InformationStructure& structure);

// Weighted average of the accuracy table; weights align with
// result.decision_ids and must be positive. Value in [0,1].
double team_fitness(const TeamRunResult& result, std::span<const double> weights);

}  // namespace echelon
