#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "echelon/team.hpp"

using namespace echelon;

namespace {

// Three agents, three decisions, constant forecasts. Accuracy pins below
// are frozen from a 40-digit evaluation of the accuracy formula at the
// hand-counted time pressures.
TeamInstance small_instance() {
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
  inst.staleness_factor = 0.95;
  return inst;
}

// ann decides D1, bob D2, cat D3; everything needed travels by push.
InformationStructure push_structure() {
  InformationStructure s;
  s.responsibility = {{"D1", "ann"}, {"D2", "bob"}, {"D3", "cat"}};
  s.sharing = {
      {"D2", "ann", ShareMode::push},
      {"D1", "cat", ShareMode::push},
      {"D2", "cat", ShareMode::push},
      {"D1", "bob", ShareMode::push},
  };
  return s;
}

constexpr double kAccTp050 = 0.98632660660190855986;  // tp = 0.50
constexpr double kAccTp075 = 0.98068417442047513685;  // tp = 0.75
constexpr double kAccTp080 = 0.9793131744699623107;   // tp = 0.80
constexpr double kAccTp100 = 0.97284336693367968738;  // tp = 1.00
constexpr double kAccTp110 = 0.9689321834567851546;   // tp = 1.10

const std::vector<double>& row_of(const TeamRunResult& r, const std::string& id) {
  for (std::size_t i = 0; i < r.decision_ids.size(); ++i) {
    if (r.decision_ids[i] == id) return r.accuracy[i];
  }
  throw std::out_of_range(id);
}

}  // namespace

TEST_CASE("validate_instance accepts the small instance") {
  CHECK_NOTHROW(validate_instance(small_instance()));
}

TEST_CASE("validate_instance rejects structural defects") {
  auto broken = [] { return small_instance(); };
  {
    TeamInstance i = broken();
    i.agents.clear();
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.agents.push_back(i.agents.front());
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.decisions[0].dependencies = {"D1"};  // self-dependency
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.decisions[0].dependencies = {"ghost"};
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.forecasts.erase("D2");
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.forecasts["D2"].pop_back();  // shorter than the horizon
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.forecasts["D2"][1].time_availability = 0.0;
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.forecasts["D2"][1].n_options = 1;
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    // Ceiling below the chance floor would blow up mid-run; reject early.
    TeamInstance i = broken();
    i.forecasts["D2"][1].discriminability = 0.1;
    i.forecasts["D2"][1].n_options = 8;
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.staleness_factor = 0.0;
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.weights = {{"D1", 1.0}, {"D2", 1.0}};  // D3 missing
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
  {
    TeamInstance i = broken();
    i.agents[0].decision_curves["ghost"] = {1.0, 1.0};
    CHECK_THROWS_AS(validate_instance(i), std::invalid_argument);
  }
}

TEST_CASE("validate_structure rejects bad wiring") {
  const TeamInstance inst = small_instance();
  {
    InformationStructure s = push_structure();
    s.responsibility.erase("D3");
    CHECK_THROWS_AS(validate_structure(inst, s), std::invalid_argument);
  }
  {
    InformationStructure s = push_structure();
    s.responsibility["D1"] = "ghost";
    CHECK_THROWS_AS(validate_structure(inst, s), std::invalid_argument);
  }
  {
    InformationStructure s = push_structure();
    s.sharing.push_back({"D1", "ann", ShareMode::push});  // to its own owner
    CHECK_THROWS_AS(validate_structure(inst, s), std::invalid_argument);
  }
  {
    InformationStructure s = push_structure();
    s.sharing.push_back(s.sharing.front());  // duplicate pair
    CHECK_THROWS_AS(validate_structure(inst, s), std::invalid_argument);
  }
  {
    InformationStructure s = push_structure();
    s.sharing.push_back({"ghost", "ann", ShareMode::push});
    CHECK_THROWS_AS(validate_structure(inst, s), std::invalid_argument);
  }
  CHECK_NOTHROW(validate_structure(inst, push_structure()));
}

TEST_CASE("dependency_satisfied follows ownership and sharing edges") {
  const TeamInstance inst = small_instance();
  InformationStructure s = push_structure();
  CHECK(dependency_satisfied(inst, s, "D1"));
  CHECK(dependency_satisfied(inst, s, "D2"));  // no dependencies at all
  CHECK(dependency_satisfied(inst, s, "D3"));

  // Drop the edge that feeds D2 to ann; D1 goes blind.
  s.sharing.erase(s.sharing.begin());
  CHECK_FALSE(dependency_satisfied(inst, s, "D1"));
  CHECK(dependency_satisfied(inst, s, "D3"));

  // Owning the dependency needs no edge: give D2 to ann as well.
  s.responsibility["D2"] = "ann";
  // (the old D2 -> ann edge is gone, so no owner-edge conflict)
  CHECK(dependency_satisfied(inst, s, "D1"));

  CHECK_THROWS_AS(dependency_satisfied(inst, s, "ghost"), std::invalid_argument);
}

TEST_CASE("interaction pressure counts pushes, pulls served, and extra decisions") {
  const TeamInstance inst = small_instance();
  SUBCASE("all push") {
    const InformationStructure s = push_structure();
    CHECK(interaction_pressure(inst, s, "ann") == 0.5);   // one push received
    CHECK(interaction_pressure(inst, s, "bob") == 0.25);  // one push received
    CHECK(interaction_pressure(inst, s, "cat") == doctest::Approx(0.6));  // two pushes
  }
  SUBCASE("pull load lands on the provider") {
    InformationStructure s = push_structure();
    s.sharing[0].mode = ShareMode::pull;  // D2 -> ann now pull, served by bob
    s.sharing[1].mode = ShareMode::pull;  // D1 -> cat now pull, served by ann
    CHECK(interaction_pressure(inst, s, "ann") == 0.5);   // serves one pull
    CHECK(interaction_pressure(inst, s, "bob") == 0.5);   // push + pull served
    CHECK(interaction_pressure(inst, s, "cat") == doctest::Approx(0.3));  // one push left
  }
  SUBCASE("owning several decisions costs beyond the first") {
    InformationStructure s;
    s.responsibility = {{"D1", "ann"}, {"D2", "ann"}, {"D3", "ann"}};
    CHECK(interaction_pressure(inst, s, "ann") == 1.0);  // two extra decisions
    CHECK(interaction_pressure(inst, s, "bob") == 0.0);
  }
  CHECK_THROWS_AS(interaction_pressure(inst, push_structure(), "ghost"),
                  std::invalid_argument);
}

TEST_CASE("simulate_team reproduces pinned accuracies for the push structure") {
  const TeamInstance inst = small_instance();
  const TeamRunResult r = simulate_team(inst, push_structure());
  REQUIRE(r.decision_ids.size() == 3);
  // tp(D1) = 1/2 + 0.5, tp(D2) = 1/4 + 0.25, tp(D3) = 1/2 + 0.6.
  for (double v : row_of(r, "D1")) CHECK(v == doctest::Approx(kAccTp100).epsilon(1e-15));
  for (double v : row_of(r, "D2")) CHECK(v == doctest::Approx(kAccTp050).epsilon(1e-15));
  for (double v : row_of(r, "D3")) CHECK(v == doctest::Approx(kAccTp110).epsilon(1e-15));
  CHECK(r.fitness ==
        doctest::Approx((kAccTp100 + kAccTp050 + kAccTp110) / 3.0).epsilon(1e-14));
}

TEST_CASE("pull edges shift pressure and stale the dependent decisions") {
  const TeamInstance inst = small_instance();
  InformationStructure s = push_structure();
  s.sharing[0].mode = ShareMode::pull;  // D2 -> ann
  s.sharing[1].mode = ShareMode::pull;  // D1 -> cat
  const TeamRunResult r = simulate_team(inst, s);
  // tp(D1) = 1/2 + 0.5 with one stale dependency.
  for (double v : row_of(r, "D1"))
    CHECK(v == doctest::Approx(kAccTp100 * 0.95).epsilon(1e-15));
  // tp(D2) = 1/4 + 0.5: bob now also serves ann's pull.
  for (double v : row_of(r, "D2")) CHECK(v == doctest::Approx(kAccTp075).epsilon(1e-15));
  // tp(D3) = 1/2 + 0.3: cat receives one push; D1 arrives stale.
  for (double v : row_of(r, "D3"))
    CHECK(v == doctest::Approx(kAccTp080 * 0.95).epsilon(1e-15));
}

TEST_CASE("two pulled dependencies square the staleness factor") {
  const TeamInstance inst = small_instance();
  InformationStructure s = push_structure();
  s.sharing[1].mode = ShareMode::pull;  // D1 -> cat
  s.sharing[2].mode = ShareMode::pull;  // D2 -> cat
  const TeamRunResult r = simulate_team(inst, s);
  // cat's pressure drops to zero pushes; tp(D3) = 1/2 + 0.
  const double base = 0.5 + 0.5 * (1.0 - error_fraction({3.0, 0.7}, 0.5));
  for (double v : row_of(r, "D3"))
    CHECK(v == doctest::Approx(base * 0.95 * 0.95).epsilon(1e-14));
}

TEST_CASE("an unmet dependency zeroes the whole row exactly") {
  const TeamInstance inst = small_instance();
  InformationStructure s = push_structure();
  s.sharing.erase(s.sharing.begin());  // D1 loses sight of D2
  const TeamRunResult r = simulate_team(inst, s);
  for (double v : row_of(r, "D1")) CHECK(v == 0.0);
  for (double v : row_of(r, "D2")) CHECK(v > 0.0);
  CHECK(r.fitness < simulate_team(inst, push_structure()).fitness);
}

TEST_CASE("per-decision curve overrides the agent default") {
  TeamInstance inst = small_instance();
  inst.agents[0].decision_curves["D1"] = {5.0, 1.0};
  const TeamRunResult r = simulate_team(inst, push_structure());
  for (double v : row_of(r, "D1"))
    CHECK(v == doctest::Approx(0.99100689501895422099).epsilon(1e-15));
}

TEST_CASE("agent load is interaction pressure plus owned forecast pressure") {
  const TeamInstance inst = small_instance();
  const TeamRunResult r = simulate_team(inst, push_structure());
  for (double v : r.agent_load.at("ann")) CHECK(v == doctest::Approx(1.0));    // 0.5 + 1/2
  for (double v : r.agent_load.at("bob")) CHECK(v == doctest::Approx(0.5));    // 0.25 + 1/4
  for (double v : r.agent_load.at("cat")) CHECK(v == doctest::Approx(1.1));    // 0.6 + 1/2
}

TEST_CASE("more available time never hurts accuracy") {
  TeamInstance inst = small_instance();
  inst.forecasts["D2"] = {{1.0, 1.0, 2}, {2.0, 1.0, 2}, {8.0, 1.0, 2}};
  const TeamRunResult r = simulate_team(inst, push_structure());
  const auto& row = row_of(r, "D2");
  CHECK(row[0] < row[1]);
  CHECK(row[1] < row[2]);
}

TEST_CASE("weights bias the fitness toward heavy decisions") {
  TeamInstance inst = small_instance();
  inst.weights = {{"D1", 2.0}, {"D2", 1.0}, {"D3", 1.0}};
  const TeamRunResult r = simulate_team(inst, push_structure());
  CHECK(r.fitness == doctest::Approx((2.0 * kAccTp100 + kAccTp050 + kAccTp110) / 4.0)
                         .epsilon(1e-14));
}

TEST_CASE("team_fitness arithmetic and validation") {
  TeamRunResult r;
  r.decision_ids = {"a", "b"};
  r.accuracy = {{1.0, 1.0}, {0.0, 0.0}};
  const std::vector<double> w{1.0, 3.0};
  CHECK(team_fitness(r, w) == 0.25);

  const std::vector<double> short_w{1.0};
  CHECK_THROWS_AS(team_fitness(r, short_w), std::invalid_argument);
  const std::vector<double> neg{1.0, -1.0};
  CHECK_THROWS_AS(team_fitness(r, neg), std::invalid_argument);
  r.accuracy[1].pop_back();
  CHECK_THROWS_AS(team_fitness(r, w), std::invalid_argument);
  TeamRunResult empty;
  CHECK_THROWS_AS(team_fitness(empty, w), std::invalid_argument);
}
