#include <doctest.h>

#include "sosim/core.hpp"
#include "sosim/errors.hpp"
#include "sosim/topology.hpp"

using namespace sosim;

TEST_CASE("cost arithmetic treats unavailable as absorbing") {
  const Cost a{2.0}, none = Cost::unavailable();
  CHECK((a + 1.5).value() == doctest::Approx(3.5));
  CHECK_FALSE((none + 1.0).available());
  CHECK_FALSE((a + none).available());
  CHECK(a.cheaper_than(none));
  CHECK_FALSE(none.cheaper_than(a));
  CHECK_FALSE(none.cheaper_than(none));
  CHECK(min_cost(none, a) == a);
  CHECK(min_cost(Cost{1.0}, Cost{1.0}) == Cost{1.0});
}

TEST_CASE("capacity") {
  CHECK_FALSE(Capacity::unbounded().bounded());
  CHECK(std::isinf(Capacity::unbounded().as_double()));
  CHECK(Capacity{3.0}.as_double() == 3.0);
}

TEST_CASE("catalog lookup") {
  ResourceCatalog c({"power", "water"});
  CHECK(c.index_of("water") == ResourceIndex{1});
  CHECK_FALSE(c.index_of("gas").has_value());
}

TEST_CASE("fixtures validate") {
  CHECK(validate_network(validation_fixture_3node()).ok());
  CHECK(validate_network(block_fixture()).ok());
}

TEST_CASE("validation reports structural problems") {
  Network net = validation_fixture_3node();

  SUBCASE("dangling endpoint") {
    net.links[0].to = 7;
    const auto rep = validate_network(net);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.to_string().find("dangling endpoint") != std::string::npos);
  }
  SUBCASE("self loop") {
    net.links[1].from = net.links[1].to;
    CHECK(validate_network(net).to_string().find("self loop") != std::string::npos);
  }
  SUBCASE("negative transport cost") {
    net.links[2].transport_cost[1] = Cost{-0.1};
    CHECK(validate_network(net).to_string().find("negative cost") != std::string::npos);
  }
  SUBCASE("vector length") {
    net.agents[0].final_demand.pop_back();
    CHECK_FALSE(validate_network(net).ok());
  }
  SUBCASE("negative technical coefficient") {
    net.agents[1].tech(0, 1) = -0.5;
    CHECK_FALSE(validate_network(net).ok());
  }
  SUBCASE("duplicate resource names") {
    net.catalog = ResourceCatalog({"R1", "R1", "R3"});
    CHECK_FALSE(validate_network(net).ok());
  }
  SUBCASE("require_valid throws") {
    net.links[0].from = -1;
    CHECK_THROWS_AS(require_valid(net), ValidationError);
  }
}

TEST_CASE("consumers and producible sets") {
  const Network net = validation_fixture_3node();
  CHECK(net.agents[2].is_consumer());
  CHECK_FALSE(net.agents[0].is_consumer());
  CHECK(producible_set(net.agents[1]) == ResourceSet{1});
  CHECK(producible_set(net.agents[2]) == ResourceSet{2});
  CHECK(producible_set(net.agents[0]).empty());
  const auto D = final_demands(net);
  CHECK(D(2, 2) == 10.0);
  CHECK(D(0, 0) == 0.0);
}
