#pragma once

#include <cstdint>

#include "sosim/core.hpp"
#include "sosim/disruption.hpp"

namespace sosim {

struct RoleMix {
  double provider_fraction = 0.2;
  double producer_fraction = 0.4;
  double consumer_fraction = 0.4;
};

struct GeneratorOptions {
  std::size_t resources = 6;
  int max_attempts = 100;
  double provider_cost_lo = 1.0;
  double provider_cost_hi = 5.0;
  double transport_cost_lo = 0.05;
  double transport_cost_hi = 1.0;
  double demand_lo = 1.0;
  double demand_hi = 10.0;
};

/// Directed G(n, p), resampled until weakly connected. Demand is placed only
/// on (consumer, resource) pairs the generated network can price.
/// Throws Disconnected after `max_attempts` draws.
Network erdos_renyi(int n, double p, const RoleMix& mix, std::uint64_t seed,
                    const GeneratorOptions& opts = {});

/// One dominant coefficient U[0.5, 0.9] per producible column, the rest
/// U[0, 0.3]; rescaled so the producible block has spectral radius <= 0.9.
TechnologyMatrix synth_tech_matrix(Rng& rng, const ResourceSet& producible,
                                   std::size_t resources);

bool weakly_connected(std::size_t n, const std::vector<std::pair<int, int>>& edges);

/// Three agents, three links, three resources.
Network validation_fixture_3node();

/// Fourteen agents and sixteen links over six resources.
Network block_fixture();

/// Resource order of the block fixture.
enum BlockResource : ResourceIndex {
  kPower = 0,
  kWater = 1,
  kGas = 2,
  kPetrol = 3,
  kCapital = 4,
  kConsumer = 5,
};

}  // namespace sosim
