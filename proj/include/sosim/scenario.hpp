#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sosim/allocation.hpp"
#include "sosim/core.hpp"
#include "sosim/disruption.hpp"

namespace sosim {

struct TimedEvent {
  int start = 1;  // first timestep (1-based) at which the event is active
  DisruptionEvent event;

  bool operator==(const TimedEvent&) const = default;
};

/// Scale factors for the factorial severity levels. Fixture parameters.
struct Severity {
  double medium_matrix = 1.25;
  double heavy_matrix = 1.75;
  double heavy_link_cost = 3.0;

  bool operator==(const Severity&) const = default;
};

struct ScenarioSpec {
  std::string name = "custom";
  std::vector<TimedEvent> timeline;
  std::vector<Generator> generators;
  int horizon = 1;
  /// Replaces the network's own final demand when set (agents x resources).
  std::optional<Grid<double>> demands;
  AllocateOptions allocation;
};

struct SupplyStep {
  double quantity = 0.0;  // cumulative
  double cost = 0.0;      // marginal unit cost of the units up to `quantity`

  bool operator==(const SupplyStep&) const = default;
};

struct SupplyCurve {
  std::vector<SupplyStep> steps;
  std::string provenance;
  double demanded_total = 0.0;
  bool truncated = false;
  std::optional<double> truncated_at;  // first scale that could not be met

  bool operator==(const SupplyCurve&) const = default;
};

struct StepRecord {
  int timestep = 0;
  double total_cost = 0.0;
  double total_shortfall = 0.0;
  std::vector<Cost> consumer_cost;  // quantity-weighted, one per consumer
  std::vector<std::string> active_events;

  bool operator==(const StepRecord&) const = default;
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string rng = kRngName;
  std::vector<AgentId> consumers;
  std::vector<std::string> consumer_labels;
  std::vector<StepRecord> steps;
  SupplyCurve curve;

  bool operator==(const RunResult&) const = default;
};

/// Seed for the k-th generator of a run whose config leaves it unset.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t k);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

RunResult run(const Network& net, const ScenarioSpec& spec,
              std::uint64_t seed = 0, std::string config_hash = {});

/// Sum over agents and resources of served quantity times delivered cost.
double total_cost(const FlowState& state);
double total_shortfall(const FlowState& state);

/// Agents with any positive entry in `demands`, ascending id.
std::vector<AgentId> consumer_agents(const Grid<double>& demands);

/// Quantity-weighted mean delivered cost per consumer (Unavailable when the
/// consumer received nothing).
std::vector<Cost> consumer_average_cost(const FlowState& state,
                                        const std::vector<AgentId>& consumers);

SupplyCurve supply_curve(const Network& net, const Grid<double>& demands,
                         const std::vector<double>& scales,
                         const AllocateOptions& opts = {},
                         std::string provenance = {});

/// Marginal cost at cumulative quantity q, nullopt past the last step.
std::optional<double> curve_cost_at(const SupplyCurve& curve, double q);

/// True when `upper` is at least `lower` at every quantity both cover.
bool curve_dominates(const SupplyCurve& upper, const SupplyCurve& lower,
                     double tol = 1e-9);

double satisfied_fraction(const SupplyCurve& curve, double price);

/// Events of a factorial scenario (1..8) on the block fixture.
ScenarioSpec build_paper_scenario(int id, const Network& base,
                                  const Severity& severity = {});

struct SuiteEntry {
  std::string name;  // "base", "S1" .. "S8"
  double total_cost = 0.0;
  double total_shortfall = 0.0;
  SupplyCurve curve;
};

/// Base plus the eight factorial scenarios, in that order.
std::vector<SuiteEntry> paper_suite(const Network& base,
                                    const std::vector<double>& scales,
                                    const Severity& severity = {},
                                    const AllocateOptions& opts = {});

/// Severity order used for reporting: base, S1, S4, S2, S3, S5, S6, S7, S8.
const std::vector<int>& severity_order();

}  // namespace sosim
