#include <doctest.h>

#include <sstream>

#include "sosim/disruption.hpp"
#include "sosim/errors.hpp"
#include "sosim/gml.hpp"
#include "sosim/topology.hpp"

using namespace sosim;

namespace {

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("shortest round-trip decimals") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1e-20) == "1e-20");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("fixtures write deterministically and round-trip") {
  for (const Network& net : {validation_fixture_3node(), block_fixture()}) {
    const std::string a = to_gml(net), b = to_gml(net);
    CHECK(a == b);
    CHECK(read_gml(a) == net);
  }
  const std::string three = to_gml(validation_fixture_3node());
  CHECK(count(three, "node [") == 3);
  CHECK(count(three, "edge [") == 3);
}

TEST_CASE("round-trip keeps unavailable costs and bounded capacities") {
  Network net = apply_event(validation_fixture_3node(), {LinkBreak{1}, std::nullopt});
  net.links[0].capacity[2] = Capacity{2.5};
  const std::string text = to_gml(net);
  CHECK(text.find("cost \"INF INF INF\"") != std::string::npos);
  CHECK(text.find("UNB") != std::string::npos);
  CHECK(read_gml(text) == net);
}

TEST_CASE("writer reports bytes") {
  std::ostringstream out;
  const auto n = write_gml(block_fixture(), out);
  CHECK(n == out.str().size());
}

TEST_CASE("reader resolves ids and tolerates unknown attributes") {
  const char* text = R"(# comment
graph [
  directed 1
  resources "a b"
  colour "red"
  node [ id 10 label "X" providercosts "1 NA" weight 3 ]
  node [ id 4 label "Y" finaldemand "2 0" ]
  edge [ source 10 target 4 cost "0.5 INF" ]
]
)";
  std::vector<std::string> warnings;
  const Network net = read_gml(text, &warnings);
  CHECK(warnings.size() == 2);
  REQUIRE(net.agent_count() == 2);
  CHECK(net.agents[0].label == "Y");  // ids are densified in ascending order
  CHECK(net.agents[1].provider_costs[0] == Cost{1.0});
  CHECK_FALSE(net.agents[1].provider_costs[1].available());
  CHECK(net.links[0].from == 1);
  CHECK(net.links[0].to == 0);
  CHECK_FALSE(net.links[0].transport_cost[1].available());
  CHECK_FALSE(net.links[0].capacity[0].bounded());
  CHECK(net.agents[0].final_demand_priority == kLastPriority);
}

TEST_CASE("parse and schema errors") {
  SUBCASE("short techmatrix") {
    CHECK_THROWS_AS(read_gml(R"(graph [ resources "a b" node [ id 0 techmatrix "0 0 0" ] ])"),
                    SchemaError);
  }
  SUBCASE("missing cost") {
    CHECK_THROWS_AS(read_gml(R"(graph [ resources "a" node [ id 0 ] node [ id 1 ]
                                edge [ source 0 target 1 ] ])"),
                    SchemaError);
  }
  SUBCASE("undeclared endpoint") {
    CHECK_THROWS_AS(read_gml(R"(graph [ resources "a" node [ id 0 ]
                                edge [ source 0 target 3 cost "1" ] ])"),
                    SchemaError);
  }
  SUBCASE("duplicate node id") {
    CHECK_THROWS_AS(read_gml(R"(graph [ resources "a" node [ id 0 ] node [ id 0 ] ])"),
                    SchemaError);
  }
  SUBCASE("no graph") { CHECK_THROWS_AS(read_gml("foo 1"), SchemaError); }
  SUBCASE("unbalanced brackets carry a line number") {
    try {
      read_gml("graph [\n  resources \"a\"\n  node [ id 0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("bad number token") {
    CHECK_THROWS_AS(read_gml(R"(graph [ resources "a" node [ id 0 finaldemand "x" ] ])"),
                    ParseError);
  }
}

TEST_CASE("random networks round-trip") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Network net = erdos_renyi(8 + static_cast<int>(seed % 10), 0.3, RoleMix{}, seed);
    Rng rng(seed);
    for (auto& l : net.links) {
      for (std::size_t r = 0; r < l.capacity.size(); ++r) {
        if (rng.bernoulli(0.2)) l.capacity[r] = Capacity{rng.uniform(0.0, 50.0)};
        if (rng.bernoulli(0.1)) l.transport_cost[r] = Cost::unavailable();
      }
    }
    REQUIRE(read_gml(to_gml(net)) == net);
  }
}
