#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "echelon/team.hpp"

namespace echelon {

// Flat genome. For a layout with n_d decisions and n_a agents the order is:
// n_d responsibility genes (agent index per decision), then for each decision
// n_a-1 sharing genes over the non-owner agents in id-sorted order, values
// 0 = none, 1 = push, 2 = pull.
using Chromosome = std::vector<int>;

inline constexpr int kGeneNone = 0;
inline constexpr int kGenePush = 1;
inline constexpr int kGenePull = 2;

struct ChromosomeLayout {
  std::vector<std::string> agents;     // id-sorted
  std::vector<std::string> decisions;  // id-sorted

  std::size_t sharing_slots() const { return agents.empty() ? 0 : agents.size() - 1; }
  std::size_t gene_count() const { return decisions.size() * (1 + sharing_slots()); }
};

ChromosomeLayout make_layout(const TeamInstance& instance);

// Layout-index of the agent behind sharing slot `slot` of a decision owned by
// agent `owner`: the id-sorted agent list with the owner removed.
std::size_t slot_agent(const ChromosomeLayout& layout, std::size_t owner, std::size_t slot);

// Lossless up to edge order: decode emits sharing edges sorted by
// (decision, recipient) in layout order.
Chromosome encode(const ChromosomeLayout& layout, const InformationStructure& structure);
InformationStructure decode(const ChromosomeLayout& layout, const Chromosome& chromosome);

enum class Selection { tournament, roulette };

struct GaConfig {
  int population = 60;
  int generations = 100;
  double mutation_rate = 0.03;  // per gene
  double crossover_rate = 0.8;  // uniform crossover
  Selection selection = Selection::tournament;
  int tournament_k = 3;
  int elitism = 2;
  std::uint64_t seed = 0;
};

void validate_config(const GaConfig& config);

struct OptimizeResult {
  InformationStructure best;
  Chromosome best_chromosome;
  double best_fitness = 0.0;
  // Entry 0 covers the initial population, one further entry per generation.
  std::vector<double> generation_best;
  std::vector<double> best_so_far;  // running maximum, non-decreasing
  std::uint64_t evaluations = 0;
};

// Seeded, bit-reproducible GA over information structures; fitness is the
// team fitness of the decoded structure. All randomness comes from one
// mt19937_64 stream drawn on the driving thread, so the worker count never
// changes the result. Ties rank the lexicographically smaller chromosome
// higher.
OptimizeResult ga_optimize(const TeamInstance& instance, const GaConfig& config,
                           unsigned workers = 1);

// Number of decodable chromosomes for the layout; +inf if it overflows.
double search_space_size(const ChromosomeLayout& layout);

inline constexpr std::uint64_t kExhaustiveCap = 10'000'000;

// Enumerates every decodable chromosome in lexicographic order and returns
// the maximizer (ties: smallest chromosome). Refuses layouts whose space
// exceeds `cap` evaluations.
OptimizeResult exhaustive_search(const TeamInstance& instance, std::uint64_t cap = kExhaustiveCap,
                                 unsigned workers = 1);

// Plain-text rendering: responsibilities per agent, sharing arcs with modes,
// and a dependency-satisfaction flag per decision.
std::string structure_report(const TeamInstance& instance, const InformationStructure& structure);

}  // namespace echelon
