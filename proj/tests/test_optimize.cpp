#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "echelon/optimize.hpp"

using namespace echelon;

namespace {

TeamInstance three_agent_instance() {
  TeamInstance inst;
  inst.agents = {
      {"ann", 0.5, {3.0, 0.7}, {}},
      {"bob", 0.25, {3.0, 0.7}, {}},
      {"cat", 0.3, {3.0, 0.7}, {}},
  };
  inst.decisions = {
      {"D1", {"D2"}},
      {"D2", {}},
      {"D3", {"D1", "D2"}},
  };
  inst.forecasts["D1"] = std::vector<ForecastSample>(3, {2.0, 1.0, 2});
  inst.forecasts["D2"] = std::vector<ForecastSample>(3, {4.0, 1.0, 2});
  inst.forecasts["D3"] = std::vector<ForecastSample>(3, {2.0, 1.0, 2});
  inst.horizon = 3;
  return inst;
}

// One decision, two agents: six chromosomes in total. Agent y is nearly
// useless for the decision, so ownership must land on x; a push edge to y
// changes nothing, which makes the lexicographic tie-break observable.
TeamInstance tie_instance() {
  TeamInstance inst;
  inst.agents = {
      {"x", 0.5, {10.0, 1.0}, {}},
      {"y", 0.5, {0.1, 1.0}, {}},
  };
  inst.decisions = {{"D", {}}};
  inst.forecasts["D"] = std::vector<ForecastSample>(2, {1.0, 1.0, 2});
  inst.horizon = 2;
  return inst;
}

TeamInstance pair_instance() {
  TeamInstance inst;
  inst.agents = {
      {"p", 0.4, {4.0, 0.8}, {}},
      {"q", 0.2, {2.5, 0.6}, {{"B", {6.0, 1.0}}}},
  };
  inst.decisions = {{"A", {"B"}}, {"B", {}}};
  inst.forecasts["A"] = std::vector<ForecastSample>(4, {1.5, 0.95, 3});
  inst.forecasts["B"] = std::vector<ForecastSample>(4, {2.0, 0.9, 4});
  inst.horizon = 4;
  return inst;
}

}  // namespace

TEST_CASE("layout sorts ids and sizes the genome") {
  const ChromosomeLayout layout = make_layout(three_agent_instance());
  CHECK(layout.agents == std::vector<std::string>{"ann", "bob", "cat"});
  CHECK(layout.decisions == std::vector<std::string>{"D1", "D2", "D3"});
  CHECK(layout.sharing_slots() == 2);
  CHECK(layout.gene_count() == 9);

  TeamInstance bad = three_agent_instance();
  bad.horizon = 0;
  CHECK_THROWS_AS(make_layout(bad), std::invalid_argument);
}

TEST_CASE("slot_agent skips the owner") {
  const ChromosomeLayout layout = make_layout(three_agent_instance());
  // Owner 1 (bob): slots cover ann, cat.
  CHECK(slot_agent(layout, 1, 0) == 0);
  CHECK(slot_agent(layout, 1, 1) == 2);
  // Owner 0 (ann): slots cover bob, cat.
  CHECK(slot_agent(layout, 0, 0) == 1);
  CHECK(slot_agent(layout, 0, 1) == 2);
  CHECK_THROWS_AS(slot_agent(layout, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(slot_agent(layout, 0, 2), std::invalid_argument);
}

TEST_CASE("encode and decode invert each other on a hand structure") {
  const TeamInstance inst = three_agent_instance();
  const ChromosomeLayout layout = make_layout(inst);
  InformationStructure s;
  s.responsibility = {{"D1", "ann"}, {"D2", "bob"}, {"D3", "cat"}};
  s.sharing = {
      {"D2", "ann", ShareMode::push},
      {"D1", "cat", ShareMode::pull},
      {"D2", "cat", ShareMode::push},
  };
  const Chromosome chrom = encode(layout, s);
  REQUIRE(chrom.size() == 9);
  CHECK(chrom[0] == 0);  // D1 -> ann
  CHECK(chrom[1] == 1);  // D2 -> bob
  CHECK(chrom[2] == 2);  // D3 -> cat

  const InformationStructure back = decode(layout, chrom);
  CHECK(back.responsibility == s.responsibility);
  REQUIRE(back.sharing.size() == 3);
  // Decode emits edges sorted by (decision, recipient slot).
  CHECK(back.sharing[0].decision == "D1");
  CHECK(back.sharing[0].recipient == "cat");
  CHECK(back.sharing[0].mode == ShareMode::pull);
  CHECK(back.sharing[1].decision == "D2");
  CHECK(back.sharing[1].recipient == "ann");
  CHECK(back.sharing[2].decision == "D2");
  CHECK(back.sharing[2].recipient == "cat");
  CHECK(encode(layout, back) == chrom);
}

TEST_CASE("random chromosomes survive a decode/encode round trip") {
  const TeamInstance inst = three_agent_instance();
  const ChromosomeLayout layout = make_layout(inst);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    Chromosome c(layout.gene_count());
    for (std::size_t g = 0; g < c.size(); ++g) {
      c[g] = static_cast<int>(rng() % 3);  // three agents, three share modes
    }
    const InformationStructure s = decode(layout, c);
    CHECK_NOTHROW(validate_structure(inst, s));  // decode output is always legal
    CHECK(encode(layout, s) == c);
  }
}

TEST_CASE("decode rejects malformed genomes") {
  const ChromosomeLayout layout = make_layout(three_agent_instance());
  Chromosome ok(9, 0);
  CHECK_NOTHROW(decode(layout, ok));
  Chromosome short_c(8, 0);
  CHECK_THROWS_AS(decode(layout, short_c), std::invalid_argument);
  Chromosome bad_owner = ok;
  bad_owner[1] = 3;
  CHECK_THROWS_AS(decode(layout, bad_owner), std::invalid_argument);
  bad_owner[1] = -1;
  CHECK_THROWS_AS(decode(layout, bad_owner), std::invalid_argument);
  Chromosome bad_mode = ok;
  bad_mode[5] = 3;
  CHECK_THROWS_AS(decode(layout, bad_mode), std::invalid_argument);
}

TEST_CASE("encode rejects structures that do not fit the layout") {
  const ChromosomeLayout layout = make_layout(three_agent_instance());
  InformationStructure s;
  s.responsibility = {{"D1", "ann"}, {"D2", "bob"}, {"D3", "cat"}};

  InformationStructure missing = s;
  missing.responsibility.erase("D2");
  CHECK_THROWS_AS(encode(layout, missing), std::invalid_argument);

  InformationStructure extra = s;
  extra.responsibility["D9"] = "ann";
  CHECK_THROWS_AS(encode(layout, extra), std::invalid_argument);

  InformationStructure ghost = s;
  ghost.responsibility["D1"] = "ghost";
  CHECK_THROWS_AS(encode(layout, ghost), std::invalid_argument);

  InformationStructure owner_edge = s;
  owner_edge.sharing = {{"D1", "ann", ShareMode::push}};
  CHECK_THROWS_AS(encode(layout, owner_edge), std::invalid_argument);

  InformationStructure dup = s;
  dup.sharing = {{"D1", "bob", ShareMode::push}, {"D1", "bob", ShareMode::pull}};
  CHECK_THROWS_AS(encode(layout, dup), std::invalid_argument);
}

TEST_CASE("ga config validation") {
  GaConfig c;
  CHECK_NOTHROW(validate_config(c));
  c.population = 1;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = {};
  c.generations = 0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = {};
  c.mutation_rate = 1.5;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = {};
  c.crossover_rate = -0.1;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = {};
  c.elitism = 0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = {};
  c.elitism = c.population;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = {};
  c.tournament_k = 0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
}

TEST_CASE("ga history shape and monotone best-so-far") {
  const TeamInstance inst = three_agent_instance();
  GaConfig cfg;
  cfg.population = 20;
  cfg.generations = 15;
  cfg.seed = 5;
  const OptimizeResult res = ga_optimize(inst, cfg);
  REQUIRE(res.generation_best.size() == 16);  // initial population + 15
  REQUIRE(res.best_so_far.size() == 16);
  CHECK(res.evaluations == 20u * 16u);
  for (std::size_t i = 1; i < res.best_so_far.size(); ++i) {
    CHECK(res.best_so_far[i] >= res.best_so_far[i - 1]);
    CHECK(res.generation_best[i] <= res.best_so_far[i]);
  }
  CHECK(res.best_fitness == res.best_so_far.back());
  CHECK(res.best_fitness >= res.best_so_far.front());
  CHECK_NOTHROW(validate_structure(inst, res.best));
}

TEST_CASE("ga runs are reproducible and worker independent") {
  const TeamInstance inst = three_agent_instance();
  GaConfig cfg;
  cfg.population = 16;
  cfg.generations = 12;
  cfg.seed = 42;
  const OptimizeResult a = ga_optimize(inst, cfg, 1);
  const OptimizeResult b = ga_optimize(inst, cfg, 1);
  const OptimizeResult c = ga_optimize(inst, cfg, 5);
  CHECK(a.best_chromosome == b.best_chromosome);
  CHECK(a.best_chromosome == c.best_chromosome);
  CHECK(a.generation_best == b.generation_best);
  CHECK(a.generation_best == c.generation_best);
  CHECK(a.best_fitness == c.best_fitness);  // bitwise
}

TEST_CASE("without variation operators the best never moves") {
  const TeamInstance inst = three_agent_instance();
  GaConfig cfg;
  cfg.population = 10;
  cfg.generations = 8;
  cfg.mutation_rate = 0.0;
  cfg.crossover_rate = 0.0;
  cfg.seed = 7;
  const OptimizeResult res = ga_optimize(inst, cfg);
  for (double f : res.best_so_far) CHECK(f == res.best_so_far.front());
}

TEST_CASE("reported ga fitness equals a full simulation of the winner") {
  const TeamInstance inst = three_agent_instance();
  for (std::uint64_t seed : {1ull, 9ull, 77ull}) {
    GaConfig cfg;
    cfg.population = 12;
    cfg.generations = 10;
    cfg.seed = seed;
    const OptimizeResult res = ga_optimize(inst, cfg);
    // The compiled evaluator must agree with the reference simulation to
    // the last bit, not approximately.
    CHECK(res.best_fitness == simulate_team(inst, res.best).fitness);
  }
}

TEST_CASE("exhaustive search enumerates everything and breaks ties low") {
  const TeamInstance inst = tie_instance();
  const OptimizeResult res = exhaustive_search(inst);
  CHECK(res.evaluations == 6);
  // Pushing to the idle agent scores identically; the tie must fall to the
  // lexicographically smaller genome, which shares nothing.
  CHECK(res.best_chromosome == Chromosome{0, 0});
  CHECK(res.best.responsibility.at("D") == "x");
  CHECK(res.best.sharing.empty());
  CHECK(res.best_fitness == simulate_team(inst, res.best).fitness);
}

TEST_CASE("exhaustive search is worker independent") {
  const TeamInstance inst = pair_instance();
  const OptimizeResult one = exhaustive_search(inst, kExhaustiveCap, 1);
  const OptimizeResult many = exhaustive_search(inst, kExhaustiveCap, 7);
  CHECK(one.best_chromosome == many.best_chromosome);
  CHECK(one.best_fitness == many.best_fitness);
  CHECK(one.evaluations == 36);
}

TEST_CASE("ga finds the exhaustive optimum on a small space") {
  const TeamInstance inst = pair_instance();
  const OptimizeResult oracle = exhaustive_search(inst);
  GaConfig cfg;
  cfg.population = 16;
  cfg.generations = 40;
  cfg.seed = 3;
  const OptimizeResult ga = ga_optimize(inst, cfg);
  CHECK(ga.best_fitness <= oracle.best_fitness);  // oracle is the true max
  CHECK(ga.best_fitness == oracle.best_fitness);
}

TEST_CASE("exhaustive search refuses oversized spaces") {
  const TeamInstance inst = pair_instance();  // 36 chromosomes
  CHECK_THROWS_WITH_AS(exhaustive_search(inst, 10),
                       doctest::Contains("use the genetic search"),
                       std::invalid_argument);
}

TEST_CASE("search space size counts decodable genomes") {
  ChromosomeLayout layout;
  layout.agents = {"a", "b", "c"};
  layout.decisions = {"d1", "d2", "d3", "d4"};
  CHECK(search_space_size(layout) == 531441.0);  // (3 * 3^2)^4

  ChromosomeLayout huge;
  for (int i = 0; i < 10; ++i) huge.agents.push_back("a" + std::to_string(i));
  for (int i = 0; i < 200; ++i) huge.decisions.push_back("d" + std::to_string(i));
  CHECK(search_space_size(huge) == std::numeric_limits<double>::infinity());
}

TEST_CASE("structure report lists owners, arcs, and dependency state") {
  const TeamInstance inst = three_agent_instance();
  InformationStructure s;
  s.responsibility = {{"D1", "ann"}, {"D2", "bob"}, {"D3", "cat"}};
  s.sharing = {{"D2", "ann", ShareMode::push}, {"D1", "cat", ShareMode::pull}};
  const std::string report = structure_report(inst, s);
  CHECK(report.find("ann decides D1") != std::string::npos);
  CHECK(report.find("D2 -> ann (push)") != std::string::npos);
  CHECK(report.find("D1 -> cat (pull)") != std::string::npos);
  CHECK(report.find("D1: met") != std::string::npos);
  // D3 misses D2 and sits with cat, which only receives D1.
  CHECK(report.find("D3: NOT met") != std::string::npos);
}
