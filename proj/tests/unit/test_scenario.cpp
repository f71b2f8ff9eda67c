#include <doctest.h>

#include <algorithm>

#include "sosim/errors.hpp"
#include "sosim/scenario.hpp"
#include "sosim/topology.hpp"

using namespace sosim;

TEST_CASE("metrics on the three-node fixture") {
  const Network net = validation_fixture_3node();
  const FlowState st = allocate(net);
  CHECK(total_cost(st) == doctest::Approx(7.35));
  CHECK(total_shortfall(st) == 0.0);
  const auto consumers = consumer_agents(final_demands(net));
  REQUIRE(consumers == std::vector<AgentId>{2});
  const auto avg = consumer_average_cost(st, consumers);
  CHECK(avg[0].value() == doctest::Approx(0.735));
}

TEST_CASE("run applies timed events only while active") {
  const Network net = validation_fixture_3node();
  ScenarioSpec spec;
  spec.name = "break";
  spec.horizon = 4;
  spec.timeline.push_back({2, {LinkBreak{1}, 2}});
  const RunResult r = run(net, spec, 7, "abc");
  REQUIRE(r.steps.size() == 4);
  CHECK(r.steps[0].total_cost == doctest::Approx(7.35));
  CHECK(r.steps[1].total_cost == doctest::Approx(21.75));
  CHECK(r.steps[2].total_cost == doctest::Approx(21.75));
  CHECK(r.steps[3].total_cost == doctest::Approx(7.35));
  CHECK(r.steps[1].active_events.size() == 1);
  CHECK(r.steps[3].active_events.empty());
  CHECK(r.seed == 7);
  CHECK(r.rng == "mt19937_64");
  CHECK(r.consumer_labels == std::vector<std::string>{"A3"});
}

TEST_CASE("run is deterministic with generators") {
  const Network net = block_fixture();
  ScenarioSpec spec;
  spec.horizon = 6;
  Generator g;
  g.targets = {0, 1, 2, 5};
  g.onset_prob = 0.4;
  g.magnitude_lo = 1.0;
  g.magnitude_hi = 4.0;
  g.duration = GeometricDuration{0.5};
  g.seed = derive_seed(3, 0);
  g.kind.type = EventType::LinkCostScale;
  spec.generators.push_back(g);
  CHECK(run(net, spec, 3) == run(net, spec, 3));
}

TEST_CASE("run errors carry the timestep") {
  Network net = validation_fixture_3node();
  ScenarioSpec spec;
  spec.horizon = 3;
  spec.timeline.push_back({3, {LinkBreak{1}, std::nullopt}});
  spec.timeline.push_back({3, {LinkBreak{2}, std::nullopt}});
  spec.timeline.push_back({3, {LinkBreak{0}, std::nullopt}});
  try {
    run(net, spec);
    FAIL("expected UnpricedDemand");
  } catch (const UnpricedDemand& e) {
    CHECK(std::string(e.what()).rfind("t=3: ", 0) == 0);
  }
  spec.timeline = {{1, {LinkBreak{42}, 1}}};
  CHECK_THROWS_AS(run(net, spec), UnresolvedTarget);
  spec.timeline = {{5, {LinkBreak{0}, 1}}};
  CHECK_THROWS_AS(run(net, spec), ValidationError);
}

TEST_CASE("derived seeds differ per generator and run") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("supply curve is a non-decreasing step function") {
  const Network net = block_fixture();
  const SupplyCurve c = supply_curve(net, final_demands(net), {0.5, 1.0, 2.0}, {}, "base");
  REQUIRE_FALSE(c.steps.empty());
  CHECK_FALSE(c.truncated);
  for (std::size_t k = 1; k < c.steps.size(); ++k) {
    CHECK(c.steps[k].quantity > c.steps[k - 1].quantity);
    CHECK(c.steps[k].cost >= c.steps[k - 1].cost);
  }
  CHECK(c.steps.back().quantity == doctest::Approx(2.0 * 570.5));
  CHECK(c.demanded_total == doctest::Approx(2.0 * 570.5));
  CHECK(curve_cost_at(c, 0.0) == c.steps.front().cost);
  CHECK_FALSE(curve_cost_at(c, 1e9).has_value());
  CHECK(satisfied_fraction(c, c.steps.back().cost) == doctest::Approx(1.0));
  CHECK(satisfied_fraction(c, 0.0) == 0.0);
  CHECK_THROWS_AS(supply_curve(net, final_demands(net), {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("supply curve truncates where demand cannot be met") {
  Network net = validation_fixture_3node();
  for (auto& l : net.links) {
    for (auto& c : l.capacity) c = Capacity{6.0};
  }
  const SupplyCurve c = supply_curve(net, final_demands(net), {0.5, 1.0, 4.0});
  CHECK(c.truncated);
  REQUIRE(c.truncated_at.has_value());
  CHECK(*c.truncated_at == 4.0);
}

TEST_CASE("curve dominance") {
  SupplyCurve lo, hi;
  lo.steps = {{1.0, 1.0}, {3.0, 2.0}};
  hi.steps = {{1.0, 1.5}, {3.0, 2.5}};
  CHECK(curve_dominates(hi, lo));
  CHECK_FALSE(curve_dominates(lo, hi));
}

TEST_CASE("factorial scenarios on the block fixture") {
  const Network base = block_fixture();
  CHECK_THROWS_AS(build_paper_scenario(0, base), UnknownScenario);
  CHECK_THROWS_AS(build_paper_scenario(9, base), UnknownScenario);
  // Infrastructure only.
  const auto s1 = build_paper_scenario(1, base);
  CHECK(s1.timeline.size() == 2);
  const auto s4 = build_paper_scenario(4, base);
  CHECK(s4.timeline.size() == 3);
  // Production only: every nonzero column of A1..A5.
  const auto s2 = build_paper_scenario(2, base);
  for (const auto& te : s2.timeline) {
    CHECK(std::holds_alternative<MatrixColumnScale>(te.event.kind));
  }
  const auto s8 = build_paper_scenario(8, base);
  CHECK(s8.timeline.size() == s4.timeline.size() + s2.timeline.size());
  CHECK(severity_order() == std::vector<int>{0, 1, 4, 2, 3, 5, 6, 7, 8});
}
