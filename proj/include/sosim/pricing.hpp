#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sosim/core.hpp"

namespace sosim {

enum class SourceKind { None, Make, Provider, Edge };

const char* to_string(SourceKind kind);

struct SourceDecision {
  SourceKind kind = SourceKind::None;
  LinkId link = -1;  // only meaningful for Edge
  Cost unit_cost;

  bool operator==(const SourceDecision&) const = default;
};

struct PriceState {
  Grid<Cost> sell_cost;           // agents x resources
  Grid<SourceDecision> decision;  // agents x resources
  int sweeps_used = 0;

  bool operator==(const PriceState&) const = default;
};

struct PricingOptions {
  double tolerance = 1e-9;
  int sweeps_per_agent = 100;
  /// Agent visiting order for the Gauss-Seidel sweeps; identity when empty.
  std::vector<AgentId> order;
  /// Relative band inside which two candidate costs count as tied.
  double tie_tolerance = 1e-12;
};

/// Cheapest external option (provider or incoming edge) for (n, r).
SourceDecision acquire_cost(const Network& net, const LinkIndex& index,
                            const PriceState& prices, AgentId n,
                            ResourceIndex r, double tie_tolerance = 1e-12);
SourceDecision acquire_cost(const Network& net, const PriceState& prices,
                            AgentId n, ResourceIndex r);

/// Unit cost of making r from inputs priced at `input_costs`.
/// Throws NotProducible when column r of the agent's matrix is zero.
Cost make_cost(const Agent& agent, std::span<const Cost> input_costs,
               ResourceIndex r);

/// All-Unavailable state sized for `net`.
PriceState empty_prices(const Network& net);

PriceState price_fixed_point(const Network& net,
                             const PricingOptions& opts = {});

/// Recomputes the cost of the recorded decision from the current state.
Cost decision_cost(const Network& net, const PriceState& prices, AgentId n,
                   ResourceIndex r);

}  // namespace sosim
