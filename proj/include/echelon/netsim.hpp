#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echelon/stability.hpp"
#include "echelon/tradeoff.hpp"

namespace echelon {

enum class NodeKind { intermediate, broker };

// Broker redistribution coefficient c in y_i = u1 * c * (1 - u_i / sum(u)):
//   conserving    c = 1/(m-1), so the downward rates sum to u1 exactly;
//   unnormalized  c = (m-2)/(m-1), which conserves only at m = 3 and
//                 amplifies the total for m > 3. Kept for comparison runs.
enum class Redistribution { conserving, unnormalized };

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::intermediate;
  SCurve curve;
  double confusion_gain = 1.0;  // K, intermediate nodes only
  Redistribution redistribution = Redistribution::conserving;  // brokers only
  std::vector<std::string> children;  // empty: leaf facing the field
};

// Rooted tree of decision-making components. Message flow downward carries
// (rate, error fraction); flow upward carries rate only.
class Topology {
 public:
  static Topology build(std::vector<NodeSpec> specs);

  std::size_t node_count() const { return specs_.size(); }
  const NodeSpec& spec(std::size_t i) const { return specs_[i]; }
  int root() const { return root_; }
  int parent(std::size_t i) const { return parents_[i]; }
  int slot(std::size_t i) const { return slots_[i]; }  // index within parent's children
  const std::vector<int>& children(std::size_t i) const { return children_[i]; }
  const std::vector<int>& leaves() const { return leaves_; }
  bool is_leaf(std::size_t i) const { return children_[i].empty(); }
  int depth(std::size_t i) const { return depths_[i]; }
  int index_of(const std::string& id) const;  // -1 when absent

 private:
  std::vector<NodeSpec> specs_;
  int root_ = -1;
  std::vector<int> parents_;
  std::vector<int> slots_;
  std::vector<std::vector<int>> children_;
  std::vector<int> leaves_;
  std::vector<int> depths_;
};

// Output ports of one node after a step. down_rates has one entry per
// subordinate; for a leaf it is the single command rate to the field.
struct NodePorts {
  double up_rate = 0.0;                 // y1
  double down_error = 0.0;              // y2, in [0,1]
  std::vector<double> down_rates;       // y3... (per subordinate)
};

// y1 = K*[u1 + f(u2+u3)]*u2 with the bracketed total error clamped to <= 1,
// y2 = u1 + (1-u1)*f(u2+u3), y3 = u2 broadcast to every subordinate.
NodePorts step_intermediate(const SCurve& curve, double confusion_gain,
                            double superior_error, double superior_rate,
                            double request_rate, std::size_t fanout,
                            double ceiling);

// Broker ports: passes errors through while steering downward traffic away
// from subordinates that are generating many requests. With every
// subordinate rate zero the superior rate is split uniformly.
NodePorts step_broker(const SCurve& curve, Redistribution mode,
                      double superior_rate, double superior_error,
                      std::span<const double> subordinate_rates, double ceiling);

struct NetworkInputs {
  std::vector<double> root_rate;   // per step
  std::vector<double> root_error;  // per step, in [0,1]
  std::map<std::string, std::vector<double>> leaf_rates;  // per leaf per step
};

NetworkInputs constant_inputs(const Topology& topo, int horizon, double root_rate,
                              double root_error,
                              const std::map<std::string, double>& leaf_rates = {});

struct NetworkRun {
  // steps[k][node] holds the ports after step k; steps[0] is the all-zero start.
  std::vector<std::vector<NodePorts>> steps;
  std::optional<int> first_saturation_step;
  // Largest rate anywhere in the system per step, for stability checks.
  std::vector<double> peak_rates;
  bool saturated() const { return first_saturation_step.has_value(); }
};

// Synchronous engine: at step k+1 every node reads its neighbors' step-k
// ports (superior's down_error/down_rate become u1/u2; subordinates' up
// rates plus any exogenous field input become u3).
NetworkRun simulate_network(const Topology& topo, const NetworkInputs& inputs,
                            int horizon, double saturation_ceiling = 1e6);

// Average leaf down_error over the trailing `window` steps.
double mean_field_error(const Topology& topo, const NetworkRun& run, int window);

struct CollapsePoint {
  double rate = 0.0;
  double mean_error = 0.0;
};

struct CollapseResult {
  std::vector<CollapsePoint> curve;
  std::optional<double> threshold_rate;  // smallest rate with error > 0.5
};

struct NetRunParams {
  int horizon = 600;
  int window = 150;
  double saturation_ceiling = 1e6;
  double root_error = 0.0;
  std::map<std::string, double> leaf_rates;  // constant exogenous field inputs
};

CollapseResult collapse_threshold(const Topology& topo, std::span<const double> rate_sweep,
                                  const NetRunParams& params, unsigned workers = 1);

enum class EnvelopeClass { stable, unstable, infeasible };

struct EnvelopeCell {
  double sum = 0.0;
  double difference = 0.0;
  EnvelopeClass cls = EnvelopeClass::stable;
  double mean_error = 0.0;  // meaningless for infeasible cells
};

struct EnvelopeResult {
  std::vector<double> sums;
  std::vector<double> differences;
  std::vector<EnvelopeCell> cells;  // sum-major: cells[is * diff_count + id]
  std::size_t stable_count = 0;

  const EnvelopeCell& at(std::size_t is, std::size_t id) const {
    return cells[is * differences.size() + id];
  }
};

// Stimulates two designated leaves with constant inputs (sum+diff)/2 and
// (sum-diff)/2 on top of the base scenario. A cell is stable when the run
// neither saturates nor collapses (trailing mean field error > 0.5 is the
// domain-specific collapse); negative implied inputs are infeasible.
EnvelopeResult stability_envelope(const Topology& topo, std::span<const double> sums,
                                  std::span<const double> differences,
                                  const std::string& left_leaf,
                                  const std::string& right_leaf, double root_rate,
                                  const NetRunParams& params, unsigned workers = 1);

struct PropagationDelta {
  std::string leaf;
  double delta = 0.0;  // mean down_error minus baseline mean
  bool stimulated = false;
};

// Stimulates one leaf and reports how much every other leaf's trailing mean
// error rose relative to the unstimulated baseline run.
std::vector<PropagationDelta> propagation_trace(const Topology& topo,
                                                const std::string& stimulated_leaf,
                                                double stimulus_rate, double root_rate,
                                                const NetRunParams& params);

}  // namespace echelon
