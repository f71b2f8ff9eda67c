#pragma once

#include <vector>

#include "sosim/core.hpp"
#include "sosim/pricing.hpp"
#include "sosim/production.hpp"

namespace sosim {

struct FlowState {
  Grid<double> edge_flow;      // links x resources
  std::vector<ProductionPlan> production;
  Grid<double> provider_draw;  // agents x resources (raw inflow)
  Grid<double> self_supply;    // own output consumed as input
  Grid<double> import_inflow;  // arriving over links
  Grid<Cost> delivered_cost;   // marginal unit cost at the agent
  Grid<double> served;         // satisfied final demand
  Grid<double> shortfall;      // unsatisfied final demand
  int iterations = 0;

  bool operator==(const FlowState&) const = default;
};

FlowState empty_flow(const Network& net);

/// Propagates `demands` upstream along the recorded decisions, ignoring
/// capacities. Throws UnpricedDemand for demand on an unpriced pair.
FlowState plan_quantities(const Network& net, const PriceState& prices,
                          const Grid<double>& demands);

/// Applies link capacities to a tentative plan. Each origin hands its
/// deliverable output to its consumers in ascending priority; the result is
/// re-propagated from the served quantities so it conserves flow exactly.
FlowState ration(const Network& net, const PriceState& prices,
                 const FlowState& tentative);

struct AllocateOptions {
  bool spill = true;
  int max_rounds = 50;
  double tolerance = 1e-9;
  PricingOptions pricing;
};

/// Price, plan, ration, then re-price residual demand around saturated
/// (link, resource) pairs until nothing more can be served.
FlowState allocate(const Network& net, const Grid<double>& demands,
                   const AllocateOptions& opts = {});
FlowState allocate(const Network& net, const AllocateOptions& opts = {});

/// Largest |inflow + output + provider - input use - outflow - served|.
double conservation_error(const Network& net, const FlowState& state);

/// Largest edge_flow - capacity over bounded pairs (<= 0 when feasible).
double capacity_excess(const Network& net, const FlowState& state);

/// Total flow on (link, resource) pairs whose transport cost is Unavailable.
double unavailable_flow(const Network& net, const FlowState& state);

}  // namespace sosim
