#include "echelon/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "echelon/parallel.hpp"
#include "echelon/tradeoff.hpp"

namespace echelon {

namespace {

// Draws come straight off mt19937_64 words instead of std distributions,
// whose output is implementation-defined; this keeps runs reproducible
// across standard libraries. Modulo bias is immaterial at our gene radices.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Instance recompiled to index arithmetic so the inner GA loop never touches
// string maps. evaluate() below mirrors simulate_team + team_fitness
// operation for operation; a divergence between the two is a bug (guarded by
// an exact-equality test).
struct CompiledInstance {
  ChromosomeLayout layout;
  std::size_t n_agents = 0;
  std::size_t n_decisions = 0;
  std::size_t slots = 0;
  std::size_t horizon = 0;
  double staleness_factor = 1.0;

  // Rows below follow instance declaration order, which fixes the floating
  // point summation order of the fitness.
  std::vector<std::size_t> layout_index;         // instance decision -> layout index
  std::vector<std::vector<std::size_t>> deps;    // dependency layout indices
  std::vector<double> weight;
  std::vector<const ForecastSample*> forecast;
  std::vector<std::vector<SCurve>> curve;        // [instance decision][owner layout index]
  std::vector<double> load_weight;               // per agent layout index
};

CompiledInstance compile(const TeamInstance& instance) {
  CompiledInstance ci;
  ci.layout = make_layout(instance);
  ci.n_agents = ci.layout.agents.size();
  ci.n_decisions = ci.layout.decisions.size();
  ci.slots = ci.layout.sharing_slots();
  ci.horizon = static_cast<std::size_t>(instance.horizon);
  ci.staleness_factor = instance.staleness_factor;

  std::map<std::string, std::size_t> decision_index;
  for (std::size_t i = 0; i < ci.n_decisions; ++i) decision_index[ci.layout.decisions[i]] = i;

  std::vector<const TeamAgent*> agent_at(ci.n_agents);
  for (std::size_t a = 0; a < ci.n_agents; ++a) {
    for (const auto& agent : instance.agents) {
      if (agent.id == ci.layout.agents[a]) agent_at[a] = &agent;
    }
  }

  for (const auto& d : instance.decisions) {
    ci.layout_index.push_back(decision_index.at(d.id));
    std::vector<std::size_t> dep_idx;
    dep_idx.reserve(d.dependencies.size());
    for (const auto& dep : d.dependencies) dep_idx.push_back(decision_index.at(dep));
    ci.deps.push_back(std::move(dep_idx));
    ci.weight.push_back(instance.weights.empty() ? 1.0 : instance.weights.at(d.id));
    ci.forecast.push_back(instance.forecasts.at(d.id).data());

    std::vector<SCurve> per_owner(ci.n_agents);
    for (std::size_t a = 0; a < ci.n_agents; ++a) {
      auto it = agent_at[a]->decision_curves.find(d.id);
      per_owner[a] = it != agent_at[a]->decision_curves.end() ? it->second
                                                              : agent_at[a]->pressure_curve;
    }
    ci.curve.push_back(std::move(per_owner));
  }

  ci.load_weight.resize(ci.n_agents);
  for (std::size_t a = 0; a < ci.n_agents; ++a) {
    ci.load_weight[a] = agent_at[a]->interaction_load_weight;
  }
  return ci;
}

std::size_t sharing_gene(const CompiledInstance& ci, std::size_t decision, std::size_t slot) {
  return ci.n_decisions + decision * ci.slots + slot;
}

double evaluate(const CompiledInstance& ci, const Chromosome& chrom) {
  const int* genes = chrom.data();

  std::vector<int> events(ci.n_agents, 0);
  std::vector<int> owned(ci.n_agents, 0);
  for (std::size_t ld = 0; ld < ci.n_decisions; ++ld) {
    const auto owner = static_cast<std::size_t>(genes[ld]);
    ++owned[owner];
    for (std::size_t slot = 0; slot < ci.slots; ++slot) {
      const int g = genes[sharing_gene(ci, ld, slot)];
      if (g == kGenePush) {
        ++events[slot_agent(ci.layout, owner, slot)];
      } else if (g == kGenePull) {
        ++events[owner];
      }
    }
  }
  std::vector<double> pressure(ci.n_agents);
  for (std::size_t a = 0; a < ci.n_agents; ++a) {
    int e = events[a];
    if (owned[a] > 1) e += owned[a] - 1;
    pressure[a] = ci.load_weight[a] * static_cast<double>(e);
  }

  double numerator = 0.0;
  double weight_sum = 0.0;
  for (std::size_t d = 0; d < ci.layout_index.size(); ++d) {
    const std::size_t ld = ci.layout_index[d];
    const auto owner = static_cast<std::size_t>(genes[ld]);

    bool satisfied = true;
    int pull_deps = 0;
    for (std::size_t dep_ld : ci.deps[d]) {
      const auto dep_owner = static_cast<std::size_t>(genes[dep_ld]);
      if (dep_owner == owner) continue;
      const std::size_t slot = owner < dep_owner ? owner : owner - 1;
      const int g = genes[sharing_gene(ci, dep_ld, slot)];
      if (g == kGeneNone) {
        satisfied = false;
        break;
      }
      if (g == kGenePull) ++pull_deps;
    }

    if (satisfied) {
      const double staleness = std::pow(ci.staleness_factor, pull_deps);
      const double base_pressure = pressure[owner];
      const SCurve& curve = ci.curve[d][owner];
      const ForecastSample* series = ci.forecast[d];
      const double wd = ci.weight[d];
      for (std::size_t k = 0; k < ci.horizon; ++k) {
        const ForecastSample& sample = series[k];
        DecisionAccuracyModel model{sample.discriminability, sample.n_options, curve};
        const double tp = 1.0 / sample.time_availability + base_pressure;
        numerator += wd * (decision_accuracy(model, tp) * staleness);
      }
    }
    weight_sum += ci.weight[d];
  }
  return numerator / (weight_sum * static_cast<double>(ci.horizon));
}

// Strict weak order: better fitness first, lexicographically smaller
// chromosome on ties. Every ranking in the module uses this.
bool outranks(double fit_a, const Chromosome& a, double fit_b, const Chromosome& b) {
  if (fit_a != fit_b) return fit_a > fit_b;
  return a < b;
}

}  // namespace

ChromosomeLayout make_layout(const TeamInstance& instance) {
  validate_instance(instance);
  ChromosomeLayout layout;
  for (const auto& a : instance.agents) layout.agents.push_back(a.id);
  for (const auto& d : instance.decisions) layout.decisions.push_back(d.id);
  std::sort(layout.agents.begin(), layout.agents.end());
  std::sort(layout.decisions.begin(), layout.decisions.end());
  return layout;
}

std::size_t slot_agent(const ChromosomeLayout& layout, std::size_t owner, std::size_t slot) {
  if (owner >= layout.agents.size() || slot >= layout.sharing_slots()) {
    throw std::invalid_argument("slot_agent: index out of range");
  }
  return slot < owner ? slot : slot + 1;
}

Chromosome encode(const ChromosomeLayout& layout, const InformationStructure& structure) {
  const std::size_t n_d = layout.decisions.size();
  const std::size_t slots = layout.sharing_slots();

  auto agent_index = [&](const std::string& id) -> std::size_t {
    auto it = std::lower_bound(layout.agents.begin(), layout.agents.end(), id);
    if (it == layout.agents.end() || *it != id) {
      throw std::invalid_argument("encode: agent '" + id + "' is not in the layout");
    }
    return static_cast<std::size_t>(it - layout.agents.begin());
  };

  Chromosome chrom(layout.gene_count(), kGeneNone);
  std::vector<std::size_t> owner(n_d);
  for (std::size_t ld = 0; ld < n_d; ++ld) {
    auto it = structure.responsibility.find(layout.decisions[ld]);
    if (it == structure.responsibility.end()) {
      throw std::invalid_argument("encode: decision '" + layout.decisions[ld] + "' has no owner");
    }
    owner[ld] = agent_index(it->second);
    chrom[ld] = static_cast<int>(owner[ld]);
  }
  if (structure.responsibility.size() != n_d) {
    throw std::invalid_argument("encode: responsibility covers decisions outside the layout");
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& edge : structure.sharing) {
    auto it = std::lower_bound(layout.decisions.begin(), layout.decisions.end(), edge.decision);
    if (it == layout.decisions.end() || *it != edge.decision) {
      throw std::invalid_argument("encode: edge for unknown decision '" + edge.decision + "'");
    }
    const auto ld = static_cast<std::size_t>(it - layout.decisions.begin());
    const std::size_t recipient = agent_index(edge.recipient);
    if (recipient == owner[ld]) {
      throw std::invalid_argument("encode: edge delivers '" + edge.decision + "' to its owner");
    }
    if (!seen.insert({ld, recipient}).second) {
      throw std::invalid_argument("encode: duplicate edge for '" + edge.decision + "'");
    }
    const std::size_t slot = recipient < owner[ld] ? recipient : recipient - 1;
    chrom[n_d + ld * slots + slot] = edge.mode == ShareMode::push ? kGenePush : kGenePull;
  }
  return chrom;
}

InformationStructure decode(const ChromosomeLayout& layout, const Chromosome& chromosome) {
  const std::size_t n_d = layout.decisions.size();
  const std::size_t n_a = layout.agents.size();
  const std::size_t slots = layout.sharing_slots();
  if (chromosome.size() != layout.gene_count()) {
    throw std::invalid_argument("decode: expected " + std::to_string(layout.gene_count()) +
                                " genes, got " + std::to_string(chromosome.size()));
  }

  InformationStructure structure;
  for (std::size_t ld = 0; ld < n_d; ++ld) {
    const int g = chromosome[ld];
    if (g < 0 || static_cast<std::size_t>(g) >= n_a) {
      throw std::invalid_argument("decode: responsibility gene out of range");
    }
    structure.responsibility[layout.decisions[ld]] = layout.agents[static_cast<std::size_t>(g)];
  }
  for (std::size_t ld = 0; ld < n_d; ++ld) {
    const auto owner = static_cast<std::size_t>(chromosome[ld]);
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const int g = chromosome[n_d + ld * slots + slot];
      if (g == kGeneNone) continue;
      if (g != kGenePush && g != kGenePull) {
        throw std::invalid_argument("decode: sharing gene out of range");
      }
      structure.sharing.push_back({layout.decisions[ld],
                                   layout.agents[slot_agent(layout, owner, slot)],
                                   g == kGenePush ? ShareMode::push : ShareMode::pull});
    }
  }
  return structure;
}

void validate_config(const GaConfig& config) {
  if (config.population < 2) throw std::invalid_argument("population must be >= 2");
  if (config.generations < 1) throw std::invalid_argument("generations must be >= 1");
  if (!(config.mutation_rate >= 0.0) || config.mutation_rate > 1.0) {
    throw std::invalid_argument("mutation_rate must lie in [0,1]");
  }
  if (!(config.crossover_rate >= 0.0) || config.crossover_rate > 1.0) {
    throw std::invalid_argument("crossover_rate must lie in [0,1]");
  }
  if (config.elitism < 1 || config.elitism >= config.population) {
    throw std::invalid_argument("elitism must lie in [1, population)");
  }
  if (config.selection == Selection::tournament && config.tournament_k < 1) {
    throw std::invalid_argument("tournament_k must be >= 1");
  }
}

OptimizeResult ga_optimize(const TeamInstance& instance, const GaConfig& config, unsigned workers) {
  validate_config(config);
  validate_instance(instance);
  const CompiledInstance ci = compile(instance);
  const std::size_t pop_n = static_cast<std::size_t>(config.population);
  const std::size_t genes = ci.layout.gene_count();

  std::mt19937_64 rng(config.seed);
  auto random_chromosome = [&] {
    Chromosome c(genes);
    for (std::size_t g = 0; g < genes; ++g) {
      c[g] = static_cast<int>(bounded(rng, g < ci.n_decisions ? ci.n_agents : 3));
    }
    return c;
  };

  std::vector<Chromosome> pop(pop_n);
  for (auto& c : pop) c = random_chromosome();
  std::vector<double> fit(pop_n, 0.0);

  OptimizeResult result;
  auto evaluate_all = [&] {
    parallel_for(pop_n, workers, [&](std::size_t i) { fit[i] = evaluate(ci, pop[i]); });
    result.evaluations += pop_n;
  };

  double best_fit = -1.0;
  Chromosome best_chrom;
  auto record_generation = [&] {
    std::size_t gen_best = 0;
    for (std::size_t i = 1; i < pop_n; ++i) {
      if (outranks(fit[i], pop[i], fit[gen_best], pop[gen_best])) gen_best = i;
    }
    if (best_chrom.empty() || outranks(fit[gen_best], pop[gen_best], best_fit, best_chrom)) {
      best_fit = fit[gen_best];
      best_chrom = pop[gen_best];
    }
    result.generation_best.push_back(fit[gen_best]);
    result.best_so_far.push_back(best_fit);
  };

  evaluate_all();
  record_generation();

  std::vector<std::size_t> order(pop_n);
  auto rank = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return outranks(fit[a], pop[a], fit[b], pop[b]);
    });
  };

  auto select = [&]() -> std::size_t {
    if (config.selection == Selection::tournament) {
      std::size_t winner = bounded(rng, pop_n);
      for (int i = 1; i < config.tournament_k; ++i) {
        const std::size_t c = bounded(rng, pop_n);
        if (outranks(fit[c], pop[c], fit[winner], pop[winner])) winner = c;
      }
      return winner;
    }
    double total = 0.0;
    for (double f : fit) total += f;
    if (!(total > 0.0)) return bounded(rng, pop_n);
    double r = unit_real(rng) * total;
    for (std::size_t i = 0; i < pop_n; ++i) {
      r -= fit[i];
      if (r <= 0.0) return i;
    }
    return pop_n - 1;
  };

  for (int gen = 0; gen < config.generations; ++gen) {
    rank();
    std::vector<Chromosome> next;
    next.reserve(pop_n);
    for (int e = 0; e < config.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
    while (next.size() < pop_n) {
      const Chromosome& p1 = pop[select()];
      const Chromosome& p2 = pop[select()];
      Chromosome child(genes);
      if (unit_real(rng) < config.crossover_rate) {
        for (std::size_t g = 0; g < genes; ++g) child[g] = (rng() & 1u) != 0 ? p1[g] : p2[g];
      } else {
        child = p1;
      }
      for (std::size_t g = 0; g < genes; ++g) {
        if (unit_real(rng) < config.mutation_rate) {
          child[g] = static_cast<int>(bounded(rng, g < ci.n_decisions ? ci.n_agents : 3));
        }
      }
      next.push_back(std::move(child));
    }
    pop.swap(next);
    evaluate_all();
    record_generation();
  }

  result.best = decode(ci.layout, best_chrom);
  result.best_chromosome = std::move(best_chrom);
  result.best_fitness = best_fit;
  return result;
}

double search_space_size(const ChromosomeLayout& layout) {
  long double total = 1.0L;
  const auto n_a = static_cast<long double>(layout.agents.size());
  for (std::size_t d = 0; d < layout.decisions.size(); ++d) {
    total *= n_a;
    for (std::size_t s = 0; s < layout.sharing_slots(); ++s) total *= 3.0L;
    if (total > 1e307L) return std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(total);
}

OptimizeResult exhaustive_search(const TeamInstance& instance, std::uint64_t cap,
                                 unsigned workers) {
  validate_instance(instance);
  const CompiledInstance ci = compile(instance);
  const double size = search_space_size(ci.layout);
  if (!(size <= static_cast<double>(cap))) {
    std::ostringstream msg;
    msg << "search space of " << size << " chromosomes exceeds the exhaustive cap of " << cap
        << "; use the genetic search";
    throw std::invalid_argument(msg.str());
  }
  const auto total = static_cast<std::uint64_t>(size);
  const std::size_t genes = ci.layout.gene_count();

  std::vector<int> radix(genes);
  for (std::size_t g = 0; g < genes; ++g) {
    radix[g] = g < ci.n_decisions ? static_cast<int>(ci.n_agents) : 3;
  }
  auto chromosome_at = [&](std::uint64_t index) {
    Chromosome c(genes);
    for (std::size_t g = genes; g-- > 0;) {
      c[g] = static_cast<int>(index % static_cast<std::uint64_t>(radix[g]));
      index /= static_cast<std::uint64_t>(radix[g]);
    }
    return c;
  };

  // Fixed block split; each block reports (fitness, first index reaching it),
  // merged in block order. Lexicographic chromosome order equals index order,
  // so the merge is worker-count independent.
  const std::uint64_t n_blocks =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(total, workers == 0 ? 1 : workers * 8));
  std::vector<std::pair<double, std::uint64_t>> block_best(
      static_cast<std::size_t>(n_blocks), {-1.0, 0});

  parallel_for(static_cast<std::size_t>(n_blocks), workers, [&](std::size_t b) {
    const std::uint64_t begin = total / n_blocks * b + std::min<std::uint64_t>(b, total % n_blocks);
    const std::uint64_t end =
        total / n_blocks * (b + 1) + std::min<std::uint64_t>(b + 1, total % n_blocks);
    if (begin >= end) return;
    Chromosome current = chromosome_at(begin);
    double best = -1.0;
    std::uint64_t best_index = begin;
    for (std::uint64_t i = begin; i < end; ++i) {
      const double f = evaluate(ci, current);
      if (f > best) {
        best = f;
        best_index = i;
      }
      for (std::size_t g = genes; g-- > 0;) {
        if (++current[g] < radix[g]) break;
        current[g] = 0;
      }
    }
    block_best[b] = {best, best_index};
  });

  double best = -1.0;
  std::uint64_t best_index = 0;
  for (const auto& [f, idx] : block_best) {
    if (f > best) {
      best = f;
      best_index = idx;
    }
  }

  OptimizeResult result;
  result.best_chromosome = chromosome_at(best_index);
  result.best = decode(ci.layout, result.best_chromosome);
  result.best_fitness = best;
  result.evaluations = total;
  return result;
}

std::string structure_report(const TeamInstance& instance,
                             const InformationStructure& structure) {
  validate_instance(instance);
  validate_structure(instance, structure);
  const ChromosomeLayout layout = make_layout(instance);

  std::ostringstream out;
  out << "responsibility\n";
  for (const auto& agent : layout.agents) {
    std::vector<std::string> owned;
    for (const auto& d : instance.decisions) {
      if (structure.responsibility.at(d.id) == agent) owned.push_back(d.id);
    }
    out << "  " << agent << " decides";
    if (owned.empty()) {
      out << " nothing";
    } else {
      for (std::size_t i = 0; i < owned.size(); ++i) out << (i == 0 ? " " : ", ") << owned[i];
    }
    out << "\n";
  }

  out << "sharing arcs\n";
  std::vector<SharingEdge> arcs = structure.sharing;
  std::sort(arcs.begin(), arcs.end(), [](const SharingEdge& a, const SharingEdge& b) {
    if (a.decision != b.decision) return a.decision < b.decision;
    return a.recipient < b.recipient;
  });
  if (arcs.empty()) out << "  (none)\n";
  for (const auto& edge : arcs) {
    out << "  " << edge.decision << " -> " << edge.recipient << " ("
        << (edge.mode == ShareMode::push ? "push" : "pull") << ")\n";
  }

  out << "dependencies\n";
  for (const auto& d : instance.decisions) {
    out << "  " << d.id << ": "
        << (dependency_satisfied(instance, structure, d.id) ? "met" : "NOT met") << "\n";
  }
  return out.str();
}

}  // namespace echelon
