#include "echelon/team.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace echelon {

namespace {

std::string quoted(const std::string& s) { return "'" + s + "'"; }

const TeamAgent& agent_by_id(const TeamInstance& instance, const std::string& id) {
  for (const auto& a : instance.agents) {
    if (a.id == id) return a;
  }
  throw std::invalid_argument("unknown agent " + quoted(id));
}

const std::string& owner_of(const InformationStructure& structure, const std::string& decision) {
  auto it = structure.responsibility.find(decision);
  if (it == structure.responsibility.end()) {
    throw std::invalid_argument("decision " + quoted(decision) + " has no responsible agent");
  }
  return it->second;
}

}  // namespace

void validate_instance(const TeamInstance& instance) {
  if (instance.agents.empty()) throw std::invalid_argument("instance has no agents");
  if (instance.decisions.empty()) throw std::invalid_argument("instance has no decisions");
  if (instance.horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (!(instance.staleness_factor > 0.0) || instance.staleness_factor > 1.0) {
    throw std::invalid_argument("staleness_factor must lie in (0,1]");
  }

  std::set<std::string> agent_ids;
  for (const auto& a : instance.agents) {
    if (a.id.empty()) throw std::invalid_argument("agent id must be nonempty");
    if (!agent_ids.insert(a.id).second) {
      throw std::invalid_argument("duplicate agent id " + quoted(a.id));
    }
    if (!(a.interaction_load_weight >= 0.0) || !std::isfinite(a.interaction_load_weight)) {
      throw std::invalid_argument("agent " + quoted(a.id) +
                                  ": interaction_load_weight must be finite and >= 0");
    }
    if (!(a.pressure_curve.b > 0.0)) {
      throw std::invalid_argument("agent " + quoted(a.id) + ": pressure curve needs b > 0");
    }
    for (const auto& [decision, curve] : a.decision_curves) {
      if (!(curve.b > 0.0)) {
        throw std::invalid_argument("agent " + quoted(a.id) + ": curve for " + quoted(decision) +
                                    " needs b > 0");
      }
    }
  }

  std::set<std::string> decision_ids;
  for (const auto& d : instance.decisions) {
    if (d.id.empty()) throw std::invalid_argument("decision id must be nonempty");
    if (!decision_ids.insert(d.id).second) {
      throw std::invalid_argument("duplicate decision id " + quoted(d.id));
    }
  }
  for (const auto& d : instance.decisions) {
    for (const auto& dep : d.dependencies) {
      if (dep == d.id) {
        throw std::invalid_argument("decision " + quoted(d.id) + " depends on itself");
      }
      if (!decision_ids.count(dep)) {
        throw std::invalid_argument("decision " + quoted(d.id) + " depends on unknown " +
                                    quoted(dep));
      }
    }
  }

  for (const auto& a : instance.agents) {
    for (const auto& [decision, curve] : a.decision_curves) {
      (void)curve;
      if (!decision_ids.count(decision)) {
        throw std::invalid_argument("agent " + quoted(a.id) + " has a curve for unknown decision " +
                                    quoted(decision));
      }
    }
  }

  for (const auto& d : instance.decisions) {
    auto it = instance.forecasts.find(d.id);
    if (it == instance.forecasts.end()) {
      throw std::invalid_argument("no forecast for decision " + quoted(d.id));
    }
    if (it->second.size() < static_cast<std::size_t>(instance.horizon)) {
      throw std::invalid_argument("forecast for " + quoted(d.id) +
                                  " is shorter than the horizon");
    }
    for (const auto& sample : it->second) {
      if (!(sample.time_availability > 0.0) || !std::isfinite(sample.time_availability)) {
        throw std::invalid_argument("forecast for " + quoted(d.id) +
                                    ": time_availability must be finite and > 0");
      }
      if (!(sample.discriminability > 0.0) || sample.discriminability > 1.0) {
        throw std::invalid_argument("forecast for " + quoted(d.id) +
                                    ": discriminability must lie in (0,1]");
      }
      if (sample.n_options < 2) {
        throw std::invalid_argument("forecast for " + quoted(d.id) + ": n_options must be >= 2");
      }
      if (sample.discriminability < 1.0 / static_cast<double>(sample.n_options)) {
        throw std::invalid_argument("forecast for " + quoted(d.id) +
                                    ": discriminability is below the chance floor");
      }
    }
  }
  for (const auto& [decision, series] : instance.forecasts) {
    (void)series;
    if (!decision_ids.count(decision)) {
      throw std::invalid_argument("forecast for unknown decision " + quoted(decision));
    }
  }

  if (!instance.weights.empty()) {
    for (const auto& d : instance.decisions) {
      auto it = instance.weights.find(d.id);
      if (it == instance.weights.end()) {
        throw std::invalid_argument("weights must cover every decision; missing " + quoted(d.id));
      }
      if (!(it->second > 0.0) || !std::isfinite(it->second)) {
        throw std::invalid_argument("weight for " + quoted(d.id) + " must be finite and > 0");
      }
    }
    for (const auto& [decision, w] : instance.weights) {
      (void)w;
      if (!decision_ids.count(decision)) {
        throw std::invalid_argument("weight for unknown decision " + quoted(decision));
      }
    }
  }
}

void validate_structure(const TeamInstance& instance, const InformationStructure& structure) {
  std::set<std::string> agent_ids;
  for (const auto& a : instance.agents) agent_ids.insert(a.id);
  std::set<std::string> decision_ids;
  for (const auto& d : instance.decisions) decision_ids.insert(d.id);

  for (const auto& d : instance.decisions) {
    auto it = structure.responsibility.find(d.id);
    if (it == structure.responsibility.end()) {
      throw std::invalid_argument("decision " + quoted(d.id) + " has no responsible agent");
    }
    if (!agent_ids.count(it->second)) {
      throw std::invalid_argument("decision " + quoted(d.id) + " assigned to unknown agent " +
                                  quoted(it->second));
    }
  }
  for (const auto& [decision, agent] : structure.responsibility) {
    (void)agent;
    if (!decision_ids.count(decision)) {
      throw std::invalid_argument("responsibility for unknown decision " + quoted(decision));
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& edge : structure.sharing) {
    if (!decision_ids.count(edge.decision)) {
      throw std::invalid_argument("sharing edge for unknown decision " + quoted(edge.decision));
    }
    if (!agent_ids.count(edge.recipient)) {
      throw std::invalid_argument("sharing edge to unknown agent " + quoted(edge.recipient));
    }
    if (structure.responsibility.at(edge.decision) == edge.recipient) {
      throw std::invalid_argument("sharing edge delivers " + quoted(edge.decision) +
                                  " to its own responsible agent");
    }
    if (!seen.insert({edge.decision, edge.recipient}).second) {
      throw std::invalid_argument("duplicate sharing edge for " + quoted(edge.decision) + " -> " +
                                  quoted(edge.recipient));
    }
  }
}

bool dependency_satisfied(const TeamInstance& instance, const InformationStructure& structure,
                          const std::string& decision) {
  const TeamDecision* found = nullptr;
  for (const auto& d : instance.decisions) {
    if (d.id == decision) {
      found = &d;
      break;
    }
  }
  if (found == nullptr) throw std::invalid_argument("unknown decision " + quoted(decision));

  const std::string& owner = owner_of(structure, decision);
  for (const auto& dep : found->dependencies) {
    if (owner_of(structure, dep) == owner) continue;
    bool delivered = false;
    for (const auto& edge : structure.sharing) {
      if (edge.decision == dep && edge.recipient == owner) {
        delivered = true;
        break;
      }
    }
    if (!delivered) return false;
  }
  return true;
}

double interaction_pressure(const TeamInstance& instance, const InformationStructure& structure,
                            const std::string& agent) {
  const TeamAgent& a = agent_by_id(instance, agent);

  int events = 0;
  for (const auto& edge : structure.sharing) {
    if (edge.mode == ShareMode::push && edge.recipient == agent) ++events;
    if (edge.mode == ShareMode::pull && owner_of(structure, edge.decision) == agent) ++events;
  }
  int owned = 0;
  for (const auto& [decision, responsible] : structure.responsibility) {
    (void)decision;
    if (responsible == agent) ++owned;
  }
  if (owned > 1) events += owned - 1;

  return a.interaction_load_weight * static_cast<double>(events);
}

TeamRunResult simulate_team(const TeamInstance& instance, const InformationStructure& structure) {
  validate_instance(instance);
  validate_structure(instance, structure);

  const auto steps = static_cast<std::size_t>(instance.horizon);
  TeamRunResult result;
  result.decision_ids.reserve(instance.decisions.size());

  std::map<std::string, double> pressure_by_agent;
  for (const auto& a : instance.agents) {
    pressure_by_agent[a.id] = interaction_pressure(instance, structure, a.id);
  }

  for (const auto& d : instance.decisions) {
    result.decision_ids.push_back(d.id);
    std::vector<double> row(steps, 0.0);

    if (dependency_satisfied(instance, structure, d.id)) {
      const std::string& owner = structure.responsibility.at(d.id);
      const TeamAgent& agent = agent_by_id(instance, owner);
      auto curve_it = agent.decision_curves.find(d.id);
      const SCurve& curve =
          curve_it != agent.decision_curves.end() ? curve_it->second : agent.pressure_curve;

      // Dependencies the owner only sees through pull edges arrive one step
      // stale; each one shaves a fixed factor off the accuracy.
      int pull_deps = 0;
      for (const auto& dep : d.dependencies) {
        for (const auto& edge : structure.sharing) {
          if (edge.decision == dep && edge.recipient == owner && edge.mode == ShareMode::pull) {
            ++pull_deps;
            break;
          }
        }
      }
      const double staleness = std::pow(instance.staleness_factor, pull_deps);
      const double base_pressure = pressure_by_agent.at(owner);
      const auto& series = instance.forecasts.at(d.id);

      for (std::size_t k = 0; k < steps; ++k) {
        const ForecastSample& sample = series[k];
        DecisionAccuracyModel model{sample.discriminability, sample.n_options, curve};
        const double tp = 1.0 / sample.time_availability + base_pressure;
        row[k] = decision_accuracy(model, tp) * staleness;
      }
    }
    result.accuracy.push_back(std::move(row));
  }

  for (const auto& a : instance.agents) {
    std::vector<double> load(steps, pressure_by_agent.at(a.id));
    for (const auto& d : instance.decisions) {
      if (structure.responsibility.at(d.id) != a.id) continue;
      const auto& series = instance.forecasts.at(d.id);
      for (std::size_t k = 0; k < steps; ++k) load[k] += 1.0 / series[k].time_availability;
    }
    result.agent_load[a.id] = std::move(load);
  }

  std::vector<double> weights;
  weights.reserve(instance.decisions.size());
  for (const auto& d : instance.decisions) {
    weights.push_back(instance.weights.empty() ? 1.0 : instance.weights.at(d.id));
  }
  result.fitness = team_fitness(result, weights);
  return result;
}

double team_fitness(const TeamRunResult& result, std::span<const double> weights) {
  if (result.accuracy.empty()) throw std::invalid_argument("result holds no decisions");
  if (weights.size() != result.accuracy.size()) {
    throw std::invalid_argument("weight count does not match decision count");
  }
  const std::size_t steps = result.accuracy.front().size();
  if (steps == 0) throw std::invalid_argument("result holds no steps");

  double numerator = 0.0;
  double weight_sum = 0.0;
  for (std::size_t d = 0; d < weights.size(); ++d) {
    if (!(weights[d] > 0.0) || !std::isfinite(weights[d])) {
      throw std::invalid_argument("weights must be finite and > 0");
    }
    if (result.accuracy[d].size() != steps) {
      throw std::invalid_argument("accuracy rows have uneven lengths");
    }
    for (double acc : result.accuracy[d]) numerator += weights[d] * acc;
    weight_sum += weights[d];
  }
  return numerator / (weight_sum * static_cast<double>(steps));
}

}  // namespace echelon
