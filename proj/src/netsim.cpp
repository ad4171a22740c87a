#include "echelon/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "echelon/parallel.hpp"

namespace echelon {

namespace {

double clamp_rate(double v, double ceiling) {
  return std::clamp(v, 0.0, ceiling);
}

void check_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in [0,1]");
  }
}

void check_rate(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

}  // namespace

Topology Topology::build(std::vector<NodeSpec> specs) {
  if (specs.empty()) {
    throw std::invalid_argument("Topology: node list is empty");
  }
  Topology topo;
  topo.specs_ = std::move(specs);
  const std::size_t n = topo.specs_.size();

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSpec& s = topo.specs_[i];
    if (s.id.empty()) {
      throw std::invalid_argument("Topology: node with empty id");
    }
    if (!index.emplace(s.id, static_cast<int>(i)).second) {
      throw std::invalid_argument("Topology: duplicate node id '" + s.id + "'");
    }
    if (!(s.confusion_gain >= 0.0)) {
      throw std::invalid_argument("Topology: node '" + s.id + "' has confusion_gain < 0");
    }
  }

  topo.parents_.assign(n, -1);
  topo.slots_.assign(n, -1);
  topo.children_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSpec& s = topo.specs_[i];
    if (s.kind == NodeKind::broker && s.children.size() < 2) {
      throw std::invalid_argument("Topology: broker '" + s.id + "' needs >= 2 subordinates");
    }
    for (std::size_t c = 0; c < s.children.size(); ++c) {
      auto it = index.find(s.children[c]);
      if (it == index.end()) {
        throw std::invalid_argument("Topology: node '" + s.id + "' references unknown child '" +
                                    s.children[c] + "'");
      }
      const int child = it->second;
      if (topo.parents_[static_cast<std::size_t>(child)] != -1) {
        throw std::invalid_argument("Topology: node '" + s.children[c] + "' has two superiors");
      }
      if (child == static_cast<int>(i)) {
        throw std::invalid_argument("Topology: node '" + s.id + "' is its own child");
      }
      topo.parents_[static_cast<std::size_t>(child)] = static_cast<int>(i);
      topo.slots_[static_cast<std::size_t>(child)] = static_cast<int>(c);
      topo.children_[i].push_back(child);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (topo.parents_[i] == -1) {
      if (topo.root_ != -1) {
        throw std::invalid_argument("Topology: more than one root ('" +
                                    topo.specs_[static_cast<std::size_t>(topo.root_)].id +
                                    "' and '" + topo.specs_[i].id + "')");
      }
      topo.root_ = static_cast<int>(i);
    }
  }
  if (topo.root_ == -1) {
    throw std::invalid_argument("Topology: no root (cycle)");
  }

  // Depths via BFS from the root; unreached nodes mean a detached cycle.
  topo.depths_.assign(n, -1);
  std::vector<int> stack{topo.root_};
  topo.depths_[static_cast<std::size_t>(topo.root_)] = 0;
  std::size_t visited = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++visited;
    for (int c : topo.children_[static_cast<std::size_t>(v)]) {
      topo.depths_[static_cast<std::size_t>(c)] =
          topo.depths_[static_cast<std::size_t>(v)] + 1;
      stack.push_back(c);
    }
  }
  if (visited != n) {
    throw std::invalid_argument("Topology: graph is not a single rooted tree");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (topo.children_[i].empty()) {
      if (topo.specs_[i].kind == NodeKind::broker) {
        throw std::invalid_argument("Topology: broker '" + topo.specs_[i].id +
                                    "' cannot be a leaf");
      }
      topo.leaves_.push_back(static_cast<int>(i));
    }
  }
  return topo;
}

int Topology::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

NodePorts step_intermediate(const SCurve& curve, double confusion_gain,
                            double superior_error, double superior_rate,
                            double request_rate, std::size_t fanout,
                            double ceiling) {
  check_fraction(superior_error, "step_intermediate: superior_error");
  check_rate(superior_rate, "step_intermediate: superior_rate");
  check_rate(request_rate, "step_intermediate: request_rate");

  const double f = error_fraction(curve, superior_rate + request_rate);
  // u1 + f is the total error percentage of the superior's messages; a
  // percentage cannot exceed 1.
  const double total_error = std::min(superior_error + f, 1.0);

  NodePorts ports;
  ports.up_rate = clamp_rate(confusion_gain * total_error * superior_rate, ceiling);
  ports.down_error = superior_error + (1.0 - superior_error) * f;
  ports.down_rates.assign(std::max<std::size_t>(fanout, 1),
                          clamp_rate(superior_rate, ceiling));
  return ports;
}

NodePorts step_broker(const SCurve& curve, Redistribution mode,
                      double superior_rate, double superior_error,
                      std::span<const double> subordinate_rates, double ceiling) {
  check_fraction(superior_error, "step_broker: superior_error");
  check_rate(superior_rate, "step_broker: superior_rate");
  const std::size_t m = subordinate_rates.size();
  if (m < 2) {
    throw std::invalid_argument("step_broker: need >= 2 subordinate rates");
  }
  double sum = 0.0;
  for (double r : subordinate_rates) {
    check_rate(r, "step_broker: subordinate rate");
    sum += r;
  }

  const double f = error_fraction(curve, superior_rate + sum);
  const double outgoing_error = f * (1.0 - superior_error) + superior_error;

  NodePorts ports;
  ports.up_rate = clamp_rate(superior_rate * outgoing_error, ceiling);
  ports.down_error = outgoing_error;
  ports.down_rates.resize(m);
  if (sum <= 0.0) {
    const double even = superior_rate / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      ports.down_rates[i] = clamp_rate(even, ceiling);
    }
    return ports;
  }
  const double c = (mode == Redistribution::conserving)
                       ? 1.0 / static_cast<double>(m - 1)
                       : static_cast<double>(m - 2) / static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double share = superior_rate * c * (1.0 - subordinate_rates[i] / sum);
    ports.down_rates[i] = clamp_rate(share, ceiling);
  }
  return ports;
}

NetworkInputs constant_inputs(const Topology& topo, int horizon, double root_rate,
                              double root_error,
                              const std::map<std::string, double>& leaf_rates) {
  NetworkInputs inputs;
  inputs.root_rate.assign(static_cast<std::size_t>(horizon), root_rate);
  inputs.root_error.assign(static_cast<std::size_t>(horizon), root_error);
  for (int leaf : topo.leaves()) {
    const std::string& id = topo.spec(static_cast<std::size_t>(leaf)).id;
    auto it = leaf_rates.find(id);
    inputs.leaf_rates[id].assign(static_cast<std::size_t>(horizon),
                                 it == leaf_rates.end() ? 0.0 : it->second);
  }
  return inputs;
}

NetworkRun simulate_network(const Topology& topo, const NetworkInputs& inputs,
                            int horizon, double saturation_ceiling) {
  if (horizon < 1) {
    throw std::invalid_argument("simulate_network: horizon must be >= 1");
  }
  if (!(saturation_ceiling > 0.0)) {
    throw std::invalid_argument("simulate_network: saturation_ceiling must be > 0");
  }
  const std::size_t h = static_cast<std::size_t>(horizon);
  if (inputs.root_rate.size() < h || inputs.root_error.size() < h) {
    throw std::invalid_argument("simulate_network: root input shorter than horizon");
  }
  const std::size_t n = topo.node_count();
  std::vector<const std::vector<double>*> leaf_series(n, nullptr);
  for (int leaf : topo.leaves()) {
    const std::string& id = topo.spec(static_cast<std::size_t>(leaf)).id;
    auto it = inputs.leaf_rates.find(id);
    if (it == inputs.leaf_rates.end()) continue;  // absent means zero
    if (it->second.size() < h) {
      throw std::invalid_argument("simulate_network: leaf input '" + id +
                                  "' shorter than horizon");
    }
    leaf_series[static_cast<std::size_t>(leaf)] = &it->second;
  }
  for (const auto& [id, series] : inputs.leaf_rates) {
    const int idx = topo.index_of(id);
    if (idx < 0 || !topo.is_leaf(static_cast<std::size_t>(idx))) {
      throw std::invalid_argument("simulate_network: input for non-leaf node '" + id + "'");
    }
  }

  NetworkRun run;
  run.steps.reserve(h + 1);
  run.peak_rates.reserve(h + 1);

  // All ports start at zero.
  std::vector<NodePorts> current(n);
  for (std::size_t i = 0; i < n; ++i) {
    current[i].down_rates.assign(std::max<std::size_t>(topo.children(i).size(), 1), 0.0);
  }
  run.steps.push_back(current);
  run.peak_rates.push_back(0.0);

  for (std::size_t k = 0; k < h; ++k) {
    const std::vector<NodePorts>& prev = run.steps.back();
    std::vector<NodePorts> next(n);
    double peak = 0.0;
    bool clipped = false;

    for (std::size_t i = 0; i < n; ++i) {
      const NodeSpec& spec = topo.spec(i);

      // Downward inputs come from the superior's step-k ports (or the
      // exogenous schedule at the root).
      double superior_rate, superior_error;
      if (static_cast<int>(i) == topo.root()) {
        superior_rate = inputs.root_rate[k];
        superior_error = inputs.root_error[k];
      } else {
        const auto p = static_cast<std::size_t>(topo.parent(i));
        superior_error = prev[p].down_error;
        superior_rate = prev[p].down_rates[static_cast<std::size_t>(topo.slot(i))];
      }

      if (spec.kind == NodeKind::broker) {
        std::vector<double> sub_rates;
        sub_rates.reserve(topo.children(i).size());
        for (int c : topo.children(i)) {
          sub_rates.push_back(prev[static_cast<std::size_t>(c)].up_rate);
        }
        next[i] = step_broker(spec.curve, spec.redistribution, superior_rate,
                              superior_error, sub_rates, saturation_ceiling);
      } else {
        double request_rate = 0.0;
        for (int c : topo.children(i)) {
          request_rate += prev[static_cast<std::size_t>(c)].up_rate;
        }
        if (leaf_series[i] != nullptr) {
          request_rate += (*leaf_series[i])[k];
        }
        next[i] = step_intermediate(spec.curve, spec.confusion_gain, superior_error,
                                    superior_rate, request_rate,
                                    topo.children(i).size(), saturation_ceiling);
      }

      peak = std::max(peak, next[i].up_rate);
      for (double r : next[i].down_rates) peak = std::max(peak, r);
      if (next[i].up_rate >= saturation_ceiling) clipped = true;
      for (double r : next[i].down_rates) {
        if (r >= saturation_ceiling) clipped = true;
      }
    }

    if (clipped && !run.first_saturation_step) {
      run.first_saturation_step = static_cast<int>(k) + 1;
    }
    run.peak_rates.push_back(peak);
    run.steps.push_back(std::move(next));
  }
  return run;
}

double mean_field_error(const Topology& topo, const NetworkRun& run, int window) {
  const std::size_t steps = run.steps.size();
  if (window < 1 || static_cast<std::size_t>(window) >= steps) {
    throw std::invalid_argument("mean_field_error: window must be in [1, horizon]");
  }
  const std::vector<int>& leaves = topo.leaves();
  if (leaves.empty()) {
    throw std::invalid_argument("mean_field_error: topology has no leaves");
  }
  double total = 0.0;
  for (std::size_t k = steps - static_cast<std::size_t>(window); k < steps; ++k) {
    for (int leaf : leaves) {
      total += run.steps[k][static_cast<std::size_t>(leaf)].down_error;
    }
  }
  return total / (static_cast<double>(window) * static_cast<double>(leaves.size()));
}

namespace {

double run_mean_error(const Topology& topo, double root_rate,
                      const NetRunParams& params,
                      const std::map<std::string, double>& extra_leaf) {
  std::map<std::string, double> leaf = params.leaf_rates;
  for (const auto& [id, r] : extra_leaf) leaf[id] += r;
  const NetworkInputs inputs =
      constant_inputs(topo, params.horizon, root_rate, params.root_error, leaf);
  const NetworkRun run =
      simulate_network(topo, inputs, params.horizon, params.saturation_ceiling);
  return mean_field_error(topo, run, params.window);
}

}  // namespace

CollapseResult collapse_threshold(const Topology& topo, std::span<const double> rate_sweep,
                                  const NetRunParams& params, unsigned workers) {
  if (rate_sweep.empty() || !std::is_sorted(rate_sweep.begin(), rate_sweep.end())) {
    throw std::invalid_argument("collapse_threshold: sweep grid must be nonempty ascending");
  }
  CollapseResult result;
  result.curve.resize(rate_sweep.size());
  parallel_for(rate_sweep.size(), workers, [&](std::size_t i) {
    const double rate = rate_sweep[i];
    result.curve[i] = CollapsePoint{rate, run_mean_error(topo, rate, params, {})};
  });
  for (const CollapsePoint& p : result.curve) {
    if (p.mean_error > 0.5) {
      result.threshold_rate = p.rate;
      break;
    }
  }
  return result;
}

EnvelopeResult stability_envelope(const Topology& topo, std::span<const double> sums,
                                  std::span<const double> differences,
                                  const std::string& left_leaf,
                                  const std::string& right_leaf, double root_rate,
                                  const NetRunParams& params, unsigned workers) {
  if (sums.empty() || differences.empty()) {
    throw std::invalid_argument("stability_envelope: grids must be nonempty");
  }
  const int li = topo.index_of(left_leaf);
  const int ri = topo.index_of(right_leaf);
  if (li < 0 || !topo.is_leaf(static_cast<std::size_t>(li)) || ri < 0 ||
      !topo.is_leaf(static_cast<std::size_t>(ri)) || li == ri) {
    throw std::invalid_argument("stability_envelope: stimulated nodes must be two distinct leaves");
  }

  EnvelopeResult result;
  result.sums.assign(sums.begin(), sums.end());
  result.differences.assign(differences.begin(), differences.end());
  result.cells.resize(sums.size() * differences.size());

  const StabilityCriterion criterion{params.saturation_ceiling, 10.0};

  parallel_for(result.cells.size(), workers, [&](std::size_t idx) {
    const std::size_t is = idx / differences.size();
    const std::size_t id = idx % differences.size();
    EnvelopeCell cell;
    cell.sum = sums[is];
    cell.difference = differences[id];
    const double left = 0.5 * (cell.sum + cell.difference);
    const double right = 0.5 * (cell.sum - cell.difference);
    if (left < 0.0 || right < 0.0) {
      cell.cls = EnvelopeClass::infeasible;
      result.cells[idx] = cell;
      return;
    }
    std::map<std::string, double> leaf = params.leaf_rates;
    leaf[left_leaf] += left;
    leaf[right_leaf] += right;
    const NetworkInputs inputs =
        constant_inputs(topo, params.horizon, root_rate, params.root_error, leaf);
    const NetworkRun run =
        simulate_network(topo, inputs, params.horizon, params.saturation_ceiling);
    cell.mean_error = mean_field_error(topo, run, params.window);
    // Rate blow-up (systems-theoretic) or a collapsed command stream
    // (domain-specific) both count as unstable.
    const Stability rate_cls =
        classify_peak_series(run.peak_rates, run.first_saturation_step, criterion);
    cell.cls = (rate_cls == Stability::unstable || cell.mean_error > 0.5)
                   ? EnvelopeClass::unstable
                   : EnvelopeClass::stable;
    result.cells[idx] = cell;
  });

  for (const EnvelopeCell& cell : result.cells) {
    if (cell.cls == EnvelopeClass::stable) ++result.stable_count;
  }
  return result;
}

std::vector<PropagationDelta> propagation_trace(const Topology& topo,
                                                const std::string& stimulated_leaf,
                                                double stimulus_rate, double root_rate,
                                                const NetRunParams& params) {
  const int target = topo.index_of(stimulated_leaf);
  if (target < 0 || !topo.is_leaf(static_cast<std::size_t>(target))) {
    throw std::invalid_argument("propagation_trace: '" + stimulated_leaf +
                                "' is not a leaf");
  }
  check_rate(stimulus_rate, "propagation_trace: stimulus_rate");

  // Per-leaf trailing mean errors for baseline and stimulated runs.
  auto leaf_means = [&](const std::map<std::string, double>& extra) {
    std::map<std::string, double> leaf = params.leaf_rates;
    for (const auto& [id, r] : extra) leaf[id] += r;
    const NetworkInputs inputs =
        constant_inputs(topo, params.horizon, root_rate, params.root_error, leaf);
    const NetworkRun run =
        simulate_network(topo, inputs, params.horizon, params.saturation_ceiling);
    std::map<std::string, double> means;
    const std::size_t steps = run.steps.size();
    for (int li : topo.leaves()) {
      double total = 0.0;
      for (std::size_t k = steps - static_cast<std::size_t>(params.window); k < steps; ++k) {
        total += run.steps[k][static_cast<std::size_t>(li)].down_error;
      }
      means[topo.spec(static_cast<std::size_t>(li)).id] =
          total / static_cast<double>(params.window);
    }
    return means;
  };

  const auto baseline = leaf_means({});
  const auto stimulated = leaf_means({{stimulated_leaf, stimulus_rate}});

  std::vector<PropagationDelta> deltas;
  for (int li : topo.leaves()) {
    const std::string& id = topo.spec(static_cast<std::size_t>(li)).id;
    PropagationDelta d;
    d.leaf = id;
    d.delta = stimulated.at(id) - baseline.at(id);
    d.stimulated = (li == target);
    deltas.push_back(std::move(d));
  }
  return deltas;
}

}  // namespace echelon
