#include "sosim/topology.hpp"

#include <algorithm>
#include <numeric>

#include "block_constants.hpp"
#include "sosim/errors.hpp"
#include "sosim/pricing.hpp"
#include "sosim/production.hpp"

namespace sosim {

bool weakly_connected(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (auto [a, b] : edges) {
    const auto ra = find(a);
    const auto rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

TechnologyMatrix synth_tech_matrix(Rng& rng, const ResourceSet& producible,
                                   std::size_t resources) {
  TechnologyMatrix A(resources);
  for (ResourceIndex col : producible) {
    const auto dominant = static_cast<ResourceIndex>(rng.next() % resources);
    for (ResourceIndex row = 0; row < resources; ++row) {
      A(row, col) = row == dominant ? rng.uniform(0.5, 0.9) : rng.uniform(0.0, 0.3);
    }
  }
  const double radius = productivity_check(A, producible).radius;
  if (radius > 0.9) {
    const double shrink = 0.9 / radius * (1.0 - 1e-9);
    for (ResourceIndex col : producible) {
      for (ResourceIndex row = 0; row < resources; ++row) A(row, col) *= shrink;
    }
  }
  return A;
}

namespace {

enum class Role { Provider, Producer, Consumer };

std::vector<std::string> default_resource_names(std::size_t R) {
  std::vector<std::string> names;
  for (std::size_t r = 0; r < R; ++r) names.push_back("R" + std::to_string(r + 1));
  return names;
}

ResourceSet random_subset(Rng& rng, std::size_t R) {
  ResourceSet out;
  for (ResourceIndex r = 0; r < R; ++r) {
    if (rng.bernoulli(0.5)) out.push_back(r);
  }
  if (out.empty()) out.push_back(static_cast<ResourceIndex>(rng.next() % R));
  return out;
}

}  // namespace

Network erdos_renyi(int n, double p, const RoleMix& mix, std::uint64_t seed,
                    const GeneratorOptions& opts) {
  if (n < 2) throw std::invalid_argument("erdos_renyi needs at least two agents");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability outside [0,1]");
  const double mix_total = mix.provider_fraction + mix.producer_fraction + mix.consumer_fraction;
  if (!(mix.provider_fraction >= 0.0 && mix.producer_fraction >= 0.0 &&
        mix.consumer_fraction >= 0.0 && mix_total > 0.0)) {
    throw std::invalid_argument("role fractions must be nonnegative with a positive sum");
  }

  Rng rng(seed);
  const std::size_t R = opts.resources;
  std::vector<std::pair<int, int>> edges;
  bool connected = false;
  for (int attempt = 0; attempt < opts.max_attempts && !connected; ++attempt) {
    edges.clear();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && rng.bernoulli(p)) edges.emplace_back(i, j);
      }
    }
    connected = weakly_connected(static_cast<std::size_t>(n), edges);
  }
  if (!connected) {
    throw Disconnected("no weakly connected G(" + std::to_string(n) + ", p) draw in " +
                       std::to_string(opts.max_attempts) + " attempts");
  }

  std::vector<Role> roles(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * mix_total;
    roles[i] = u < mix.provider_fraction                           ? Role::Provider
               : u < mix.provider_fraction + mix.producer_fraction ? Role::Producer
                                                                   : Role::Consumer;
  }
  auto count = [&](Role r) { return std::count(roles.begin(), roles.end(), r); };
  if (count(Role::Provider) == 0) roles[0] = Role::Provider;
  if (count(Role::Consumer) == 0) roles[n - 1] = Role::Consumer;
  if (count(Role::Provider) == 0) roles[0] = Role::Provider;  // n == 2 corner

  Network net;
  net.catalog = ResourceCatalog(default_resource_names(R));
  std::vector<int> providers;
  for (int i = 0; i < n; ++i) {
    Agent a = make_agent(i, "A" + std::to_string(i), R);
    if (roles[i] == Role::Provider) {
      providers.push_back(i);
      for (ResourceIndex r : random_subset(rng, R)) {
        a.provider_costs[r] = Cost{rng.uniform(opts.provider_cost_lo, opts.provider_cost_hi)};
      }
    } else if (roles[i] == Role::Producer) {
      a.tech = synth_tech_matrix(rng, random_subset(rng, R), R);
    }
    net.agents.push_back(std::move(a));
  }
  // Every resource gets at least one raw source somewhere.
  for (ResourceIndex r = 0; r < R; ++r) {
    bool offered = false;
    for (int i : providers) offered = offered || net.agents[i].provider_costs[r].available();
    if (!offered) {
      const int i = providers[rng.next() % providers.size()];
      net.agents[i].provider_costs[r] =
          Cost{rng.uniform(opts.provider_cost_lo, opts.provider_cost_hi)};
    }
  }

  std::vector<int> out_rank(n, 0);
  for (auto [from, to] : edges) {
    InfraLink link = make_link(static_cast<LinkId>(net.links.size()), from, to, R, 0.0,
                               out_rank[from]++);
    for (ResourceIndex r = 0; r < R; ++r) {
      link.transport_cost[r] = Cost{rng.uniform(opts.transport_cost_lo, opts.transport_cost_hi)};
    }
    net.links.push_back(std::move(link));
  }

  // Demand only where a price exists, so every generated net allocates.
  std::vector<std::vector<double>> wish(n);
  for (int i = 0; i < n; ++i) {
    if (roles[i] != Role::Consumer) continue;
    wish[i].assign(R, 0.0);
    for (ResourceIndex r = 0; r < R; ++r) wish[i][r] = rng.uniform(opts.demand_lo, opts.demand_hi);
  }
  const PriceState prices = price_fixed_point(net);
  for (int i = 0; i < n; ++i) {
    if (wish[i].empty()) continue;
    for (ResourceIndex r = 0; r < R; ++r) {
      if (prices.sell_cost(i, r).available()) net.agents[i].final_demand[r] = wish[i][r];
    }
  }
  return net;
}

Network validation_fixture_3node() {
  constexpr std::size_t R = 3;
  Network net;
  net.catalog = ResourceCatalog({"R1", "R2", "R3"});

  Agent a1 = make_agent(0, "A1", R);
  a1.provider_costs[0] = Cost{1.0};
  a1.provider_costs[1] = Cost{4.0};  // expensive raw R2

  Agent a2 = make_agent(1, "A2", R);
  a2.tech(0, 1) = 0.5;  // R2 from R1

  Agent a3 = make_agent(2, "A3", R);
  a3.tech(0, 2) = 0.3;  // R3 from R1 and R2
  a3.tech(1, 2) = 0.4;
  a3.final_demand = {0.0, 0.0, 10.0};

  net.agents = {a1, a2, a3};
  InfraLink t1 = make_link(0, 0, 1, R, 0.2);
  InfraLink t2 = make_link(1, 1, 2, R, 0.3);
  InfraLink t3 = make_link(2, 0, 2, R, 0.5);
  t3.transport_cost[0] = Cost{0.25};
  net.links = {t1, t2, t3};
  return net;
}

Network block_fixture() {
  using namespace block;
  constexpr std::size_t R = kResources;
  Network net;
  net.catalog = ResourceCatalog({"power", "water", "gas", "petrol", "capital", "consumer"});

  for (int i = 0; i < 14; ++i) net.agents.push_back(make_agent(i, "A" + std::to_string(i), R));
  auto set_column = [&](int agent, ResourceIndex out, const Column& col) {
    for (ResourceIndex in = 0; in < R; ++in) net.agents[agent].tech(in, out) = col[in];
  };

  net.agents[0].provider_costs[kPetrol] = Cost{kPetrolPrice};
  net.agents[0].provider_costs[kCapital] = Cost{kCapitalPrice};

  net.agents[1].provider_costs[kPower] = Cost{kPowerPrice};
  net.agents[1].provider_costs[kWater] = Cost{kWaterPrice};
  net.agents[1].provider_costs[kGas] = Cost{kGasPrice};
  set_column(1, kPower, kA1Power);

  // A2 produces power, water and consumer goods.
  net.agents[2].tech = TechnologyMatrix(R, {
      0.18, 0.90, 0, 0, 0, 0.20,
      0.30, 0.10, 0, 0, 0, 0.30,
      0.76, 0.10, 0, 0, 0, 0.40,
      0.30, 0.08, 0, 0, 0, 0.30,
      0.14, 0.05, 0, 0, 0, 0.20,
      0.10, 0.05, 0, 0, 0, 0,
  });
  set_column(3, kConsumer, kA3Consumer);
  set_column(4, kConsumer, kA4Consumer);
  for (int i = 5; i <= 13; ++i) set_column(i, kConsumer, kHouseholdConsumer);

  // Final demand of A5..A13, by resource.
  const double demand[9][6] = {
      {9.75, 9.75, 12.75, 13.75, 17.75, 19.75},
      {10.75, 9.75, 11.75, 9.75, 9.75, 17.75},
      {9.75, 9.75, 9.75, 9.75, 9.75, 10.75},
      {9.75, 9.75, 9.75, 9.75, 9.75, 10.75},
      {9.75, 9.75, 9.75, 9.75, 9.75, 10.75},
      {9.75, 9.75, 9.75, 9.75, 9.75, 9.75},
      {9.75, 9.75, 9.75, 9.75, 9.75, 10.75},
      {9.75, 10.75, 9.75, 9.75, 9.75, 10.75},
      {9.75, 9.75, 9.75, 9.75, 10.75, 10.75},
  };
  for (int k = 0; k < 9; ++k) {
    net.agents[5 + k].final_demand.assign(std::begin(demand[k]), std::end(demand[k]));
  }

  const std::pair<int, int> commercial[] = {{0, 2}, {0, 3}, {0, 4}, {1, 2},
                                            {2, 1}, {2, 3}, {3, 4}};
  const std::pair<int, int> consumer[] = {{2, 5},  {2, 6},  {3, 7},  {3, 8}, {4, 9},
                                          {4, 10}, {4, 11}, {1, 12}, {1, 13}};
  std::vector<int> out_rank(14, 0);
  auto add = [&](int from, int to, double cost) {
    net.links.push_back(make_link(static_cast<LinkId>(net.links.size()), from, to, R, cost,
                                  out_rank[from]++));
  };
  for (auto [f, t] : commercial) add(f, t, kCommercialLinkCost);
  for (auto [f, t] : consumer) add(f, t, kConsumerLinkCost);
  return net;
}

}  // namespace sosim
