#include "echelon/scenario.hpp"

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "echelon/io.hpp"

namespace echelon {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw std::invalid_argument(where.empty() ? msg : where + ": " + msg);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (std::string_view key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& as_object(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  return v;
}

double to_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

int to_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  const auto n = v.get<std::int64_t>();
  if (n < -2147483648LL || n > 2147483647LL) fail(where, "integer out of range");
  return static_cast<int>(n);
}

std::uint64_t to_u64(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(where, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string to_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

SCurve parse_curve(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where, {"a", "b"});
  SCurve curve;
  curve.a = to_double(require(obj, where, "a"), where + ".a");
  curve.b = to_double(require(obj, where, "b"), where + ".b");
  if (!(curve.b > 0.0)) fail(where + ".b", "must be > 0");
  return curve;
}

GridSpec parse_grid(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where, {"min", "max", "count"});
  GridSpec grid;
  grid.min = to_double(require(obj, where, "min"), where + ".min");
  grid.max = to_double(require(obj, where, "max"), where + ".max");
  grid.count = to_int(require(obj, where, "count"), where + ".count");
  if (grid.count < 1) fail(where + ".count", "must be >= 1");
  if (grid.max < grid.min) fail(where, "max must be >= min");
  if (grid.count == 1 && grid.max != grid.min) fail(where, "count 1 requires max = min");
  return grid;
}

DyadScenario parse_dyad(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where,
             {"curve", "saturation_ceiling", "horizon", "growth_factor", "k_grid", "u_grid"});
  DyadScenario s;
  s.curve = parse_curve(require(obj, where, "curve"), where + ".curve");
  if (const json* c = find(obj, "saturation_ceiling")) {
    s.saturation_ceiling = to_double(*c, where + ".saturation_ceiling");
    if (!(s.saturation_ceiling > 0.0)) fail(where + ".saturation_ceiling", "must be > 0");
  }
  if (const json* h = find(obj, "horizon")) {
    s.sweep.horizon = to_int(*h, where + ".horizon");
    if (s.sweep.horizon < 8) fail(where + ".horizon", "must be >= 8");
  }
  if (const json* g = find(obj, "growth_factor")) {
    s.sweep.growth_factor = to_double(*g, where + ".growth_factor");
    if (!(s.sweep.growth_factor > 1.0)) fail(where + ".growth_factor", "must be > 1");
  }
  s.k_grid = parse_grid(require(obj, where, "k_grid"), where + ".k_grid");
  s.u_grid = parse_grid(require(obj, where, "u_grid"), where + ".u_grid");
  return s;
}

NodeSpec parse_node(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where, {"id", "kind", "curve", "confusion_gain", "redistribution", "children"});
  NodeSpec node;
  node.id = to_string(require(obj, where, "id"), where + ".id");
  if (const json* kind = find(obj, "kind")) {
    const std::string k = to_string(*kind, where + ".kind");
    if (k == "intermediate") {
      node.kind = NodeKind::intermediate;
    } else if (k == "broker") {
      node.kind = NodeKind::broker;
    } else {
      fail(where + ".kind", "expected 'intermediate' or 'broker'");
    }
  }
  node.curve = parse_curve(require(obj, where, "curve"), where + ".curve");
  if (const json* gain = find(obj, "confusion_gain")) {
    node.confusion_gain = to_double(*gain, where + ".confusion_gain");
    if (!(node.confusion_gain >= 0.0)) fail(where + ".confusion_gain", "must be >= 0");
  }
  if (const json* redist = find(obj, "redistribution")) {
    const std::string r = to_string(*redist, where + ".redistribution");
    if (r == "conserving") {
      node.redistribution = Redistribution::conserving;
    } else if (r == "unnormalized") {
      node.redistribution = Redistribution::unnormalized;
    } else {
      fail(where + ".redistribution", "expected 'conserving' or 'unnormalized'");
    }
  }
  if (const json* children = find(obj, "children")) {
    if (!children->is_array()) fail(where + ".children", "expected an array");
    for (std::size_t i = 0; i < children->size(); ++i) {
      node.children.push_back(
          to_string((*children)[i], where + ".children[" + std::to_string(i) + "]"));
    }
  }
  return node;
}

NetworkScenario parse_network(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  NetworkScenario s;

  const std::string exp = to_string(require(obj, where, "experiment"), where + ".experiment");
  if (exp == "timeseries") {
    s.experiment = NetExperiment::timeseries;
    check_keys(obj, where,
               {"experiment", "nodes", "horizon", "window", "saturation_ceiling", "root_error",
                "leaf_rates", "root_rate"});
  } else if (exp == "collapse") {
    s.experiment = NetExperiment::collapse;
    check_keys(obj, where,
               {"experiment", "nodes", "horizon", "window", "saturation_ceiling", "root_error",
                "leaf_rates", "rate_grid"});
  } else if (exp == "envelope") {
    s.experiment = NetExperiment::envelope;
    check_keys(obj, where,
               {"experiment", "nodes", "horizon", "window", "saturation_ceiling", "root_error",
                "leaf_rates", "root_rate", "sum_grid", "diff_grid", "left_leaf", "right_leaf"});
  } else if (exp == "propagation") {
    s.experiment = NetExperiment::propagation;
    check_keys(obj, where,
               {"experiment", "nodes", "horizon", "window", "saturation_ceiling", "root_error",
                "leaf_rates", "root_rate", "stimulated_leaf", "stimulus"});
  } else {
    fail(where + ".experiment",
         "expected 'timeseries', 'collapse', 'envelope' or 'propagation'");
  }

  const json& nodes = require(obj, where, "nodes");
  if (!nodes.is_array() || nodes.empty()) fail(where + ".nodes", "expected a nonempty array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    s.nodes.push_back(parse_node(nodes[i], where + ".nodes[" + std::to_string(i) + "]"));
  }
  // Build once here so structural errors surface at load time.
  const Topology topo = Topology::build(s.nodes);

  if (const json* h = find(obj, "horizon")) {
    s.params.horizon = to_int(*h, where + ".horizon");
    if (s.params.horizon < 1) fail(where + ".horizon", "must be >= 1");
  }
  if (const json* w = find(obj, "window")) {
    s.params.window = to_int(*w, where + ".window");
    if (s.params.window < 1) fail(where + ".window", "must be >= 1");
  }
  if (s.params.window > s.params.horizon) fail(where, "window must be <= horizon");
  if (const json* c = find(obj, "saturation_ceiling")) {
    s.params.saturation_ceiling = to_double(*c, where + ".saturation_ceiling");
    if (!(s.params.saturation_ceiling > 0.0)) fail(where + ".saturation_ceiling", "must be > 0");
  }
  if (const json* e = find(obj, "root_error")) {
    s.params.root_error = to_double(*e, where + ".root_error");
    if (s.params.root_error < 0.0 || s.params.root_error > 1.0) {
      fail(where + ".root_error", "must lie in [0,1]");
    }
  }
  if (const json* rates = find(obj, "leaf_rates")) {
    const json& robj = as_object(*rates, where + ".leaf_rates");
    for (const auto& item : robj.items()) {
      const std::string rw = where + ".leaf_rates." + item.key();
      const int idx = topo.index_of(item.key());
      if (idx < 0 || !topo.is_leaf(static_cast<std::size_t>(idx))) {
        fail(rw, "not a leaf of the topology");
      }
      const double rate = to_double(item.value(), rw);
      if (rate < 0.0) fail(rw, "must be >= 0");
      s.params.leaf_rates[item.key()] = rate;
    }
  }

  auto leaf_ref = [&](const char* key) {
    const std::string id = to_string(require(obj, where, key), where + "." + key);
    const int idx = topo.index_of(id);
    if (idx < 0 || !topo.is_leaf(static_cast<std::size_t>(idx))) {
      fail(where + "." + key, "'" + id + "' is not a leaf of the topology");
    }
    return id;
  };

  switch (s.experiment) {
    case NetExperiment::timeseries:
      s.root_rate = to_double(require(obj, where, "root_rate"), where + ".root_rate");
      if (s.root_rate < 0.0) fail(where + ".root_rate", "must be >= 0");
      break;
    case NetExperiment::collapse:
      s.rate_grid = parse_grid(require(obj, where, "rate_grid"), where + ".rate_grid");
      if (s.rate_grid.min < 0.0) fail(where + ".rate_grid", "rates must be >= 0");
      break;
    case NetExperiment::envelope:
      s.sum_grid = parse_grid(require(obj, where, "sum_grid"), where + ".sum_grid");
      s.diff_grid = parse_grid(require(obj, where, "diff_grid"), where + ".diff_grid");
      s.left_leaf = leaf_ref("left_leaf");
      s.right_leaf = leaf_ref("right_leaf");
      if (s.left_leaf == s.right_leaf) fail(where, "left_leaf and right_leaf must differ");
      if (const json* r = find(obj, "root_rate")) {
        s.root_rate = to_double(*r, where + ".root_rate");
        if (s.root_rate < 0.0) fail(where + ".root_rate", "must be >= 0");
      }
      break;
    case NetExperiment::propagation:
      s.stimulated_leaf = leaf_ref("stimulated_leaf");
      s.stimulus = to_double(require(obj, where, "stimulus"), where + ".stimulus");
      if (!(s.stimulus > 0.0)) fail(where + ".stimulus", "must be > 0");
      if (const json* r = find(obj, "root_rate")) {
        s.root_rate = to_double(*r, where + ".root_rate");
        if (s.root_rate < 0.0) fail(where + ".root_rate", "must be >= 0");
      }
      break;
  }
  return s;
}

ForecastSample parse_sample(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where, {"time_availability", "discriminability", "n_options"});
  ForecastSample sample;
  sample.time_availability =
      to_double(require(obj, where, "time_availability"), where + ".time_availability");
  sample.discriminability =
      to_double(require(obj, where, "discriminability"), where + ".discriminability");
  sample.n_options = to_int(require(obj, where, "n_options"), where + ".n_options");
  return sample;
}

// Either an explicit array of samples, or {"start": sample, "end": sample}
// interpolated linearly over the horizon (options count rounded).
std::vector<ForecastSample> parse_forecast(const json& v, const std::string& where, int horizon) {
  std::vector<ForecastSample> series;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      series.push_back(parse_sample(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return series;
  }
  const json& obj = as_object(v, where);
  check_keys(obj, where, {"start", "end"});
  const ForecastSample start = parse_sample(require(obj, where, "start"), where + ".start");
  const ForecastSample end = parse_sample(require(obj, where, "end"), where + ".end");
  series.reserve(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const double t = horizon == 1 ? 0.0 : static_cast<double>(k) / (horizon - 1);
    ForecastSample s;
    s.time_availability = start.time_availability + t * (end.time_availability - start.time_availability);
    s.discriminability = start.discriminability + t * (end.discriminability - start.discriminability);
    s.n_options = static_cast<int>(
        std::lround(start.n_options + t * (end.n_options - start.n_options)));
    series.push_back(s);
  }
  return series;
}

InformationStructure parse_structure(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where, {"responsibility", "sharing"});
  InformationStructure structure;
  const json& resp = as_object(require(obj, where, "responsibility"), where + ".responsibility");
  for (const auto& item : resp.items()) {
    structure.responsibility[item.key()] =
        to_string(item.value(), where + ".responsibility." + item.key());
  }
  if (const json* sharing = find(obj, "sharing")) {
    if (!sharing->is_array()) fail(where + ".sharing", "expected an array");
    for (std::size_t i = 0; i < sharing->size(); ++i) {
      const std::string ew = where + ".sharing[" + std::to_string(i) + "]";
      const json& eobj = as_object((*sharing)[i], ew);
      check_keys(eobj, ew, {"decision", "recipient", "mode"});
      SharingEdge edge;
      edge.decision = to_string(require(eobj, ew, "decision"), ew + ".decision");
      edge.recipient = to_string(require(eobj, ew, "recipient"), ew + ".recipient");
      const std::string mode = to_string(require(eobj, ew, "mode"), ew + ".mode");
      if (mode == "push") {
        edge.mode = ShareMode::push;
      } else if (mode == "pull") {
        edge.mode = ShareMode::pull;
      } else {
        fail(ew + ".mode", "expected 'push' or 'pull'");
      }
      structure.sharing.push_back(std::move(edge));
    }
  }
  return structure;
}

TeamScenario parse_team(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  check_keys(obj, where,
             {"horizon", "staleness_factor", "agents", "decisions", "forecasts", "weights",
              "structure", "ga"});
  TeamScenario s;
  s.instance.horizon = to_int(require(obj, where, "horizon"), where + ".horizon");
  if (const json* f = find(obj, "staleness_factor")) {
    s.instance.staleness_factor = to_double(*f, where + ".staleness_factor");
  }

  const json& agents = require(obj, where, "agents");
  if (!agents.is_array()) fail(where + ".agents", "expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string aw = where + ".agents[" + std::to_string(i) + "]";
    const json& aobj = as_object(agents[i], aw);
    check_keys(aobj, aw, {"id", "interaction_load_weight", "pressure_curve", "decision_curves"});
    TeamAgent agent;
    agent.id = to_string(require(aobj, aw, "id"), aw + ".id");
    agent.interaction_load_weight =
        to_double(require(aobj, aw, "interaction_load_weight"), aw + ".interaction_load_weight");
    agent.pressure_curve = parse_curve(require(aobj, aw, "pressure_curve"), aw + ".pressure_curve");
    if (const json* curves = find(aobj, "decision_curves")) {
      const json& cobj = as_object(*curves, aw + ".decision_curves");
      for (const auto& item : cobj.items()) {
        agent.decision_curves[item.key()] =
            parse_curve(item.value(), aw + ".decision_curves." + item.key());
      }
    }
    s.instance.agents.push_back(std::move(agent));
  }

  const json& decisions = require(obj, where, "decisions");
  if (!decisions.is_array()) fail(where + ".decisions", "expected an array");
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const std::string dw = where + ".decisions[" + std::to_string(i) + "]";
    const json& dobj = as_object(decisions[i], dw);
    check_keys(dobj, dw, {"id", "dependencies"});
    TeamDecision decision;
    decision.id = to_string(require(dobj, dw, "id"), dw + ".id");
    if (const json* deps = find(dobj, "dependencies")) {
      if (!deps->is_array()) fail(dw + ".dependencies", "expected an array");
      for (std::size_t j = 0; j < deps->size(); ++j) {
        decision.dependencies.push_back(
            to_string((*deps)[j], dw + ".dependencies[" + std::to_string(j) + "]"));
      }
    }
    s.instance.decisions.push_back(std::move(decision));
  }

  const json& forecasts = as_object(require(obj, where, "forecasts"), where + ".forecasts");
  for (const auto& item : forecasts.items()) {
    s.instance.forecasts[item.key()] = parse_forecast(
        item.value(), where + ".forecasts." + item.key(), s.instance.horizon);
  }

  if (const json* weights = find(obj, "weights")) {
    const json& wobj = as_object(*weights, where + ".weights");
    for (const auto& item : wobj.items()) {
      s.instance.weights[item.key()] = to_double(item.value(), where + ".weights." + item.key());
    }
  }

  validate_instance(s.instance);

  if (const json* structure = find(obj, "structure")) {
    s.structure = parse_structure(*structure, where + ".structure");
    validate_structure(s.instance, *s.structure);
  }

  if (const json* ga = find(obj, "ga")) {
    const std::string gw = where + ".ga";
    const json& gobj = as_object(*ga, gw);
    check_keys(gobj, gw,
               {"population", "generations", "mutation_rate", "crossover_rate", "selection",
                "tournament_k", "elitism"});
    if (const json* p = find(gobj, "population")) s.ga.population = to_int(*p, gw + ".population");
    if (const json* g = find(gobj, "generations")) {
      s.ga.generations = to_int(*g, gw + ".generations");
    }
    if (const json* m = find(gobj, "mutation_rate")) {
      s.ga.mutation_rate = to_double(*m, gw + ".mutation_rate");
    }
    if (const json* c = find(gobj, "crossover_rate")) {
      s.ga.crossover_rate = to_double(*c, gw + ".crossover_rate");
    }
    if (const json* sel = find(gobj, "selection")) {
      const std::string name = to_string(*sel, gw + ".selection");
      if (name == "tournament") {
        s.ga.selection = Selection::tournament;
      } else if (name == "roulette") {
        s.ga.selection = Selection::roulette;
      } else {
        fail(gw + ".selection", "expected 'tournament' or 'roulette'");
      }
    }
    if (const json* k = find(gobj, "tournament_k")) {
      s.ga.tournament_k = to_int(*k, gw + ".tournament_k");
    }
    if (const json* e = find(gobj, "elitism")) s.ga.elitism = to_int(*e, gw + ".elitism");
    validate_config(s.ga);
  }
  return s;
}

}  // namespace

std::vector<double> expand(const GridSpec& grid) {
  if (grid.count < 1) throw std::invalid_argument("grid count must be >= 1");
  if (!std::isfinite(grid.min) || !std::isfinite(grid.max) || grid.max < grid.min) {
    throw std::invalid_argument("grid bounds must be finite with max >= min");
  }
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(grid.count));
  if (grid.count == 1) {
    points.push_back(grid.min);
    return points;
  }
  for (int i = 0; i < grid.count; ++i) {
    points.push_back(grid.min + (grid.max - grid.min) * i / (grid.count - 1));
  }
  return points;
}

Scenario parse_scenario(const std::string& text, const std::string& source_path) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument("scenario is not valid JSON: " + std::string(e.what()));
  }
  if (!root.is_object()) throw std::invalid_argument("scenario root must be an object");
  check_keys(root, "", {"name", "model", "seed", "notes", "dyad", "network", "team"});

  Scenario scenario;
  scenario.source_path = source_path;
  scenario.digest = fnv1a64(text);
  scenario.name = to_string(require(root, "", "name"), "name");
  if (scenario.name.empty()) fail("name", "must be nonempty");
  for (char c : scenario.name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) fail("name", "only [A-Za-z0-9_-] allowed (used in output file names)");
  }
  scenario.model = to_string(require(root, "", "model"), "model");
  if (const json* seed = find(root, "seed")) scenario.seed = to_u64(*seed, "seed");
  if (const json* notes = find(root, "notes")) scenario.notes = to_string(*notes, "notes");

  const json* dyad = find(root, "dyad");
  const json* network = find(root, "network");
  const json* team = find(root, "team");
  if (scenario.model == "dyad") {
    if (dyad == nullptr) fail("", "model 'dyad' needs a 'dyad' block");
    if (network != nullptr || team != nullptr) fail("", "model 'dyad' allows only a 'dyad' block");
    scenario.dyad = parse_dyad(*dyad, "dyad");
  } else if (scenario.model == "network") {
    if (network == nullptr) fail("", "model 'network' needs a 'network' block");
    if (dyad != nullptr || team != nullptr) {
      fail("", "model 'network' allows only a 'network' block");
    }
    scenario.network = parse_network(*network, "network");
  } else if (scenario.model == "team") {
    if (team == nullptr) fail("", "model 'team' needs a 'team' block");
    if (dyad != nullptr || network != nullptr) fail("", "model 'team' allows only a 'team' block");
    scenario.team = parse_team(*team, "team");
  } else {
    fail("model", "expected 'dyad', 'network' or 'team'");
  }
  return scenario;
}

Scenario load_scenario(const std::string& path) {
  return parse_scenario(read_file(path), path);
}

}  // namespace echelon
