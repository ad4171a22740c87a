#include "echelon/runner.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "echelon/io.hpp"
#include "echelon/version.hpp"

namespace echelon {

namespace {

using ordered_json = nlohmann::ordered_json;

std::uint64_t effective_seed(const Scenario& scenario, const RunOptions& options) {
  return options.seed_override.value_or(scenario.seed);
}

struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content

  void add(std::string name, std::string content) {
    files.emplace_back(std::move(name), std::move(content));
  }
};

// Writes the data files, then a manifest listing each one with its size and
// content digest. Nothing touches the disk before this point.
RunOutput commit(const Scenario& scenario, const RunOptions& options, const char* command,
                 const std::string& started_at, OutputSet outputs) {
  ordered_json manifest;
  manifest["tool"] = std::string(kToolName);
  manifest["version"] = std::string(kToolVersion);
  manifest["command"] = command;
  manifest["scenario"] = {{"name", scenario.name},
                          {"path", scenario.source_path},
                          {"digest", "fnv1a64:" + to_hex64(scenario.digest)}};
  manifest["seed"] = effective_seed(scenario, options);
  manifest["workers"] = options.workers;
  manifest["started_at"] = started_at;

  RunOutput result;
  ordered_json listed = ordered_json::array();
  for (const auto& [name, content] : outputs.files) {
    write_file(options.out_dir / name, content);
    listed.push_back({{"file", name},
                      {"bytes", content.size()},
                      {"digest", "fnv1a64:" + to_hex64(fnv1a64(content))}});
    result.files.emplace_back(name);
  }
  manifest["finished_at"] = timestamp_utc();
  manifest["outputs"] = std::move(listed);

  result.manifest_file = scenario.name + "_manifest.json";
  write_file(options.out_dir / result.manifest_file, manifest.dump(2) + "\n");
  return result;
}

const DyadScenario& dyad_block(const Scenario& scenario, const char* command) {
  if (!scenario.dyad.has_value()) {
    throw std::invalid_argument(std::string(command) + " needs a dyad scenario, got model '" +
                                scenario.model + "'");
  }
  return *scenario.dyad;
}

const NetworkScenario& network_block(const Scenario& scenario, const char* command) {
  if (!scenario.network.has_value()) {
    throw std::invalid_argument(std::string(command) + " needs a network scenario, got model '" +
                                scenario.model + "'");
  }
  return *scenario.network;
}

const TeamScenario& team_block(const Scenario& scenario, const char* command) {
  if (!scenario.team.has_value()) {
    throw std::invalid_argument(std::string(command) + " needs a team scenario, got model '" +
                                scenario.model + "'");
  }
  return *scenario.team;
}

std::string csv_bool(bool value) { return value ? "1" : "0"; }

std::string summary_json(const ordered_json& body) { return body.dump(2) + "\n"; }

ordered_json structure_json(const InformationStructure& structure) {
  ordered_json body;
  ordered_json resp;
  for (const auto& [decision, agent] : structure.responsibility) resp[decision] = agent;
  body["responsibility"] = std::move(resp);
  std::vector<SharingEdge> arcs = structure.sharing;
  std::sort(arcs.begin(), arcs.end(), [](const SharingEdge& a, const SharingEdge& b) {
    if (a.decision != b.decision) return a.decision < b.decision;
    return a.recipient < b.recipient;
  });
  ordered_json sharing = ordered_json::array();
  for (const auto& edge : arcs) {
    sharing.push_back({{"decision", edge.decision},
                       {"recipient", edge.recipient},
                       {"mode", edge.mode == ShareMode::push ? "push" : "pull"}});
  }
  body["sharing"] = std::move(sharing);
  return body;
}

}  // namespace

RunOutput run_dyad_sweep(const Scenario& scenario, const RunOptions& options) {
  const std::string started_at = timestamp_utc();
  const DyadScenario& block = dyad_block(scenario, "dyad-sweep");

  const std::vector<double> ks = expand(block.k_grid);
  const std::vector<double> us = expand(block.u_grid);
  const DyadStabilityGrid grid = stability_region_sweep(
      block.curve, ks, us, block.saturation_ceiling, block.sweep, options.workers);

  std::string csv =
      "confusion_gain,order_rate,classification,has_equilibrium,x1_bar,error_fraction,"
      "spectral_radius,contour20,contour80\n";
  for (std::size_t ik = 0; ik < grid.k_values.size(); ++ik) {
    for (std::size_t iu = 0; iu < grid.u_values.size(); ++iu) {
      const DyadSweepCell& cell = grid.at(ik, iu);
      csv += format_double(cell.confusion_gain);
      csv += ',';
      csv += format_double(cell.order_rate);
      csv += ',';
      csv += cell.cls == Stability::stable ? "stable" : "unstable";
      csv += ',';
      csv += csv_bool(cell.has_equilibrium);
      csv += ',';
      if (cell.has_equilibrium) {
        csv += format_double(cell.x1_bar);
        csv += ',';
        csv += format_double(cell.error_fraction_at_eq);
        csv += ',';
        csv += format_double(cell.spectral_radius);
      } else {
        csv += ",,";
      }
      csv += ',';
      csv += csv_bool(cell.contour20);
      csv += ',';
      csv += csv_bool(cell.contour80);
      csv += '\n';
    }
  }

  OutputSet outputs;
  outputs.add(scenario.name + "_grid.csv", std::move(csv));
  return commit(scenario, options, "dyad-sweep", started_at, std::move(outputs));
}

RunOutput run_net_sim(const Scenario& scenario, const RunOptions& options) {
  const std::string started_at = timestamp_utc();
  const NetworkScenario& block = network_block(scenario, "net-sim");
  const Topology topo = Topology::build(block.nodes);
  OutputSet outputs;

  if (block.experiment == NetExperiment::timeseries) {
    const NetworkInputs inputs =
        constant_inputs(topo, block.params.horizon, block.root_rate, block.params.root_error,
                        block.params.leaf_rates);
    const NetworkRun run =
        simulate_network(topo, inputs, block.params.horizon, block.params.saturation_ceiling);

    std::string csv = "step,node,up_rate,down_error,down_rate_total\n";
    for (std::size_t k = 0; k < run.steps.size(); ++k) {
      for (std::size_t n = 0; n < topo.node_count(); ++n) {
        const NodePorts& ports = run.steps[k][n];
        double down_total = 0.0;
        for (double r : ports.down_rates) down_total += r;
        csv += std::to_string(k);
        csv += ',';
        csv += topo.spec(n).id;
        csv += ',';
        csv += format_double(ports.up_rate);
        csv += ',';
        csv += format_double(ports.down_error);
        csv += ',';
        csv += format_double(down_total);
        csv += '\n';
      }
    }
    outputs.add(scenario.name + "_timeseries.csv", std::move(csv));

    ordered_json summary;
    summary["mean_field_error"] = mean_field_error(topo, run, block.params.window);
    summary["saturated"] = run.saturated();
    if (run.first_saturation_step.has_value()) {
      summary["first_saturation_step"] = *run.first_saturation_step;
    } else {
      summary["first_saturation_step"] = nullptr;
    }
    outputs.add(scenario.name + "_summary.json", summary_json(summary));
    return commit(scenario, options, "net-sim", started_at, std::move(outputs));
  }

  if (block.experiment == NetExperiment::propagation) {
    const std::vector<PropagationDelta> deltas = propagation_trace(
        topo, block.stimulated_leaf, block.stimulus, block.root_rate, block.params);

    std::string csv = "leaf,delta,stimulated\n";
    double min_unstimulated = 0.0;
    bool first = true;
    for (const auto& d : deltas) {
      csv += d.leaf;
      csv += ',';
      csv += format_double(d.delta);
      csv += ',';
      csv += csv_bool(d.stimulated);
      csv += '\n';
      if (!d.stimulated && (first || d.delta < min_unstimulated)) {
        min_unstimulated = d.delta;
        first = false;
      }
    }
    outputs.add(scenario.name + "_propagation.csv", std::move(csv));

    ordered_json summary;
    summary["stimulated_leaf"] = block.stimulated_leaf;
    summary["stimulus"] = block.stimulus;
    if (first) {
      summary["min_unstimulated_delta"] = nullptr;
    } else {
      summary["min_unstimulated_delta"] = min_unstimulated;
    }
    outputs.add(scenario.name + "_summary.json", summary_json(summary));
    return commit(scenario, options, "net-sim", started_at, std::move(outputs));
  }

  throw std::invalid_argument(
      "net-sim handles 'timeseries' and 'propagation' scenarios; use net-sweep for '" +
      std::string(block.experiment == NetExperiment::collapse ? "collapse" : "envelope") + "'");
}

RunOutput run_net_sweep(const Scenario& scenario, const RunOptions& options) {
  const std::string started_at = timestamp_utc();
  const NetworkScenario& block = network_block(scenario, "net-sweep");
  const Topology topo = Topology::build(block.nodes);
  OutputSet outputs;

  if (block.experiment == NetExperiment::collapse) {
    const std::vector<double> rates = expand(block.rate_grid);
    const CollapseResult result = collapse_threshold(topo, rates, block.params, options.workers);

    std::string csv = "root_rate,mean_field_error,collapsed\n";
    for (const auto& point : result.curve) {
      csv += format_double(point.rate);
      csv += ',';
      csv += format_double(point.mean_error);
      csv += ',';
      csv += csv_bool(point.mean_error > 0.5);
      csv += '\n';
    }
    outputs.add(scenario.name + "_collapse.csv", std::move(csv));

    ordered_json summary;
    if (result.threshold_rate.has_value()) {
      summary["threshold_rate"] = *result.threshold_rate;
    } else {
      summary["threshold_rate"] = nullptr;
    }
    outputs.add(scenario.name + "_summary.json", summary_json(summary));
    return commit(scenario, options, "net-sweep", started_at, std::move(outputs));
  }

  if (block.experiment == NetExperiment::envelope) {
    const std::vector<double> sums = expand(block.sum_grid);
    const std::vector<double> diffs = expand(block.diff_grid);
    const EnvelopeResult result =
        stability_envelope(topo, sums, diffs, block.left_leaf, block.right_leaf, block.root_rate,
                           block.params, options.workers);

    std::string csv = "input_sum,input_difference,classification,mean_field_error\n";
    for (std::size_t is = 0; is < result.sums.size(); ++is) {
      for (std::size_t id = 0; id < result.differences.size(); ++id) {
        const EnvelopeCell& cell = result.at(is, id);
        csv += format_double(cell.sum);
        csv += ',';
        csv += format_double(cell.difference);
        csv += ',';
        switch (cell.cls) {
          case EnvelopeClass::stable: csv += "stable"; break;
          case EnvelopeClass::unstable: csv += "unstable"; break;
          case EnvelopeClass::infeasible: csv += "infeasible"; break;
        }
        csv += ',';
        if (cell.cls != EnvelopeClass::infeasible) csv += format_double(cell.mean_error);
        csv += '\n';
      }
    }
    outputs.add(scenario.name + "_envelope.csv", std::move(csv));

    ordered_json summary;
    summary["stable_count"] = result.stable_count;
    outputs.add(scenario.name + "_summary.json", summary_json(summary));
    return commit(scenario, options, "net-sweep", started_at, std::move(outputs));
  }

  throw std::invalid_argument(
      "net-sweep handles 'collapse' and 'envelope' scenarios; use net-sim for '" +
      std::string(block.experiment == NetExperiment::timeseries ? "timeseries" : "propagation") +
      "'");
}

RunOutput run_team_sim(const Scenario& scenario, const RunOptions& options) {
  const std::string started_at = timestamp_utc();
  const TeamScenario& block = team_block(scenario, "team-sim");
  if (!block.structure.has_value()) {
    throw std::invalid_argument("team-sim needs a 'structure' block in the scenario");
  }
  const TeamRunResult result = simulate_team(block.instance, *block.structure);

  std::string acc = "decision,step,accuracy\n";
  for (std::size_t d = 0; d < result.decision_ids.size(); ++d) {
    for (std::size_t k = 0; k < result.accuracy[d].size(); ++k) {
      acc += result.decision_ids[d];
      acc += ',';
      acc += std::to_string(k);
      acc += ',';
      acc += format_double(result.accuracy[d][k]);
      acc += '\n';
    }
  }

  std::string load = "agent,step,time_pressure\n";
  for (const auto& [agent, series] : result.agent_load) {
    for (std::size_t k = 0; k < series.size(); ++k) {
      load += agent;
      load += ',';
      load += std::to_string(k);
      load += ',';
      load += format_double(series[k]);
      load += '\n';
    }
  }

  ordered_json summary;
  summary["fitness"] = result.fitness;

  OutputSet outputs;
  outputs.add(scenario.name + "_accuracy.csv", std::move(acc));
  outputs.add(scenario.name + "_load.csv", std::move(load));
  outputs.add(scenario.name + "_summary.json", summary_json(summary));
  return commit(scenario, options, "team-sim", started_at, std::move(outputs));
}

RunOutput run_team_opt(const Scenario& scenario, const RunOptions& options) {
  const std::string started_at = timestamp_utc();
  const TeamScenario& block = team_block(scenario, "team-opt");

  OptimizeResult result;
  OutputSet outputs;
  if (options.exhaustive) {
    result = exhaustive_search(block.instance, kExhaustiveCap, options.workers);
  } else {
    GaConfig config = block.ga;
    config.seed = effective_seed(scenario, options);
    result = ga_optimize(block.instance, config, options.workers);

    std::string history = "generation,generation_best,best_so_far\n";
    for (std::size_t g = 0; g < result.generation_best.size(); ++g) {
      history += std::to_string(g);
      history += ',';
      history += format_double(result.generation_best[g]);
      history += ',';
      history += format_double(result.best_so_far[g]);
      history += '\n';
    }
    outputs.add(scenario.name + "_history.csv", std::move(history));
  }

  outputs.add(scenario.name + "_best_structure.json",
              structure_json(result.best).dump(2) + "\n");
  outputs.add(scenario.name + "_report.txt", structure_report(block.instance, result.best));

  ordered_json summary;
  summary["mode"] = options.exhaustive ? "exhaustive" : "ga";
  summary["fitness"] = result.best_fitness;
  summary["evaluations"] = result.evaluations;
  outputs.add(scenario.name + "_summary.json", summary_json(summary));
  return commit(scenario, options, "team-opt", started_at, std::move(outputs));
}

}  // namespace echelon
