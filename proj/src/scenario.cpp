#include "sosim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sosim/errors.hpp"

namespace sosim {

std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t k) {
  // splitmix64 finaliser over (seed, k)
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double total_cost(const FlowState& state) {
  double total = 0.0;
  for (std::size_t n = 0; n < state.served.rows(); ++n) {
    for (std::size_t r = 0; r < state.served.cols(); ++r) {
      const double q = state.served(n, r);
      if (q > 0.0 && state.delivered_cost(n, r).available()) {
        total += q * state.delivered_cost(n, r).value();
      }
    }
  }
  return total;
}

double total_shortfall(const FlowState& state) {
  double total = 0.0;
  for (double v : state.shortfall.values()) total += v;
  return total;
}

std::vector<AgentId> consumer_agents(const Grid<double>& demands) {
  std::vector<AgentId> out;
  for (std::size_t n = 0; n < demands.rows(); ++n) {
    for (double d : demands.row(n)) {
      if (d > 0.0) {
        out.push_back(static_cast<AgentId>(n));
        break;
      }
    }
  }
  return out;
}

std::vector<Cost> consumer_average_cost(const FlowState& state,
                                        const std::vector<AgentId>& consumers) {
  std::vector<Cost> out;
  out.reserve(consumers.size());
  for (AgentId n : consumers) {
    double q = 0.0;
    double spend = 0.0;
    for (std::size_t r = 0; r < state.served.cols(); ++r) {
      const double s = state.served(n, r);
      if (s > 0.0 && state.delivered_cost(n, r).available()) {
        q += s;
        spend += s * state.delivered_cost(n, r).value();
      }
    }
    out.push_back(q > 0.0 ? Cost{spend / q} : Cost::unavailable());
  }
  return out;
}

namespace {

// Re-raises the in-flight simulation error with the timestep prepended,
// keeping its concrete type.
[[noreturn]] void rethrow_at(int t) {
  const std::string tag = "t=" + std::to_string(t) + ": ";
  try {
    throw;
  } catch (const NotProductive& e) {
    throw NotProductive(tag + e.what());
  } catch (const NotProducible& e) {
    throw NotProducible(tag + e.what());
  } catch (const NonConvergence& e) {
    throw NonConvergence(tag + e.what());
  } catch (const UnpricedDemand& e) {
    throw UnpricedDemand(tag + e.what());
  } catch (const UnresolvedTarget& e) {
    throw UnresolvedTarget(tag + e.what());
  } catch (const SimulationError& e) {
    throw SimulationError(tag + e.what());
  }
}

bool active_at(const TimedEvent& te, int t) {
  if (t < te.start) return false;
  return te.event.permanent() || t < te.start + *te.event.duration;
}

void check_spec(const Network& net, const ScenarioSpec& spec) {
  if (spec.horizon < 1) throw ValidationError("scenario horizon must be >= 1");
  for (const auto& te : spec.timeline) {
    if (te.start < 1 || te.start > spec.horizon) {
      throw ValidationError("event start " + std::to_string(te.start) +
                            " outside horizon");
    }
    check_event(net, te.event);
  }
  for (const auto& g : spec.generators) check_generator(net, g);
  if (spec.demands && (spec.demands->rows() != net.agent_count() ||
                       spec.demands->cols() != net.resource_count())) {
    throw SchemaError("scenario demands must be agents x resources");
  }
}

}  // namespace

RunResult run(const Network& net, const ScenarioSpec& spec, std::uint64_t seed,
              std::string config_hash) {
  require_valid(net);
  check_spec(net, spec);

  Network base = net;
  if (spec.demands) {
    for (auto& agent : base.agents) {
      const auto row = spec.demands->row(agent.id);
      agent.final_demand.assign(row.begin(), row.end());
    }
  }

  RunResult result;
  result.scenario = spec.name;
  result.seed = seed;
  result.config_hash = std::move(config_hash);
  result.consumers = consumer_agents(final_demands(base));
  for (AgentId n : result.consumers) result.consumer_labels.push_back(base.agents[n].label);

  std::vector<GeneratorState> states;
  for (const auto& g : spec.generators) states.push_back(initial_state(g));

  Network working;
  Grid<double> demands;
  for (int t = 1; t <= spec.horizon; ++t) {
    StepRecord rec;
    rec.timestep = t;
    // Rebuilt from the baseline each step so overlapping events compose.
    working = base;
    for (const auto& te : spec.timeline) {
      if (!active_at(te, t)) continue;
      working = apply_event(working, te.event);
      rec.active_events.push_back(describe(te.event));
    }
    for (std::size_t k = 0; k < spec.generators.size(); ++k) {
      GeneratorStep step = generator_step(spec.generators[k], t, std::move(states[k]));
      states[k] = std::move(step.state);
      for (const auto& a : states[k].active) {
        working = apply_event(working, a.event);
        rec.active_events.push_back(describe(a.event));
      }
    }
    demands = final_demands(working);
    try {
      const FlowState flow = allocate(working, demands, spec.allocation);
      rec.total_cost = total_cost(flow);
      rec.total_shortfall = total_shortfall(flow);
      rec.consumer_cost = consumer_average_cost(flow, result.consumers);
    } catch (const SimulationError&) {
      rethrow_at(t);
    }
    result.steps.push_back(std::move(rec));
  }
  try {
    result.curve = supply_curve(working, demands, {1.0}, spec.allocation, spec.name);
  } catch (const SimulationError&) {
    rethrow_at(spec.horizon);
  }
  return result;
}

SupplyCurve supply_curve(const Network& net, const Grid<double>& demands,
                         const std::vector<double>& scales,
                         const AllocateOptions& opts, std::string provenance) {
  SupplyCurve curve;
  curve.provenance = std::move(provenance);
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0.0) || (k > 0 && !(scales[k] > scales[k - 1]))) {
      throw std::invalid_argument("supply curve scales must be positive and ascending");
    }
  }
  const std::vector<AgentId> consumers = consumer_agents(demands);
  double base_total = 0.0;
  for (double d : demands.values()) base_total += d;

  std::vector<SupplyStep> points;
  for (double s : scales) {
    Grid<double> scaled = demands;
    for (double& d : scaled.values()) d *= s;
    const double wanted = base_total * s;
    curve.demanded_total = wanted;

    FlowState flow;
    try {
      flow = allocate(net, scaled, opts);
    } catch (const UnpricedDemand&) {
      curve.truncated = true;
      curve.truncated_at = s;
      break;
    }
    if (total_shortfall(flow) > opts.tolerance * (1.0 + wanted)) {
      curve.truncated = true;
      curve.truncated_at = s;
      break;
    }

    const std::vector<Cost> avg = consumer_average_cost(flow, consumers);
    std::vector<std::pair<double, double>> per;  // (cost, quantity)
    for (std::size_t k = 0; k < consumers.size(); ++k) {
      double q = 0.0;
      for (double v : flow.served.row(consumers[k])) q += v;
      if (q > 0.0 && avg[k].available()) per.emplace_back(avg[k].value(), q);
    }
    std::stable_sort(per.begin(), per.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double cumulative = 0.0;
    for (const auto& [c, q] : per) {
      cumulative += q;
      points.push_back({cumulative, c});
    }
  }

  // Pool the scales and keep the upper envelope so the curve is a
  // non-decreasing step function in quantity.
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.quantity < b.quantity;
  });
  double running = 0.0;
  for (const auto& p : points) {
    running = std::max(running, p.cost);
    if (!curve.steps.empty() && p.quantity <= curve.steps.back().quantity) {
      curve.steps.back().cost = running;
    } else {
      curve.steps.push_back({p.quantity, running});
    }
  }
  return curve;
}

std::optional<double> curve_cost_at(const SupplyCurve& curve, double q) {
  for (const auto& s : curve.steps) {
    if (q <= s.quantity) return s.cost;
  }
  return std::nullopt;
}

bool curve_dominates(const SupplyCurve& upper, const SupplyCurve& lower,
                     double tol) {
  std::vector<double> probes;
  double prev = 0.0;
  auto add_probes = [&](const SupplyCurve& c) {
    prev = 0.0;
    for (const auto& s : c.steps) {
      probes.push_back(s.quantity);
      probes.push_back(0.5 * (prev + s.quantity));
      prev = s.quantity;
    }
  };
  add_probes(upper);
  add_probes(lower);
  for (double q : probes) {
    const auto hi = curve_cost_at(upper, q);
    const auto lo = curve_cost_at(lower, q);
    if (hi && lo && *hi < *lo - tol * (1.0 + std::abs(*lo))) return false;
  }
  return true;
}

double satisfied_fraction(const SupplyCurve& curve, double price) {
  if (curve.demanded_total <= 0.0) return 0.0;
  double q = 0.0;
  for (const auto& s : curve.steps) {
    if (s.cost <= price) q = s.quantity;
  }
  return std::clamp(q / curve.demanded_total, 0.0, 1.0);
}

namespace {

AgentId agent_by_label(const Network& net, const std::string& label) {
  for (const auto& a : net.agents) {
    if (a.label == label) return a.id;
  }
  throw UnresolvedTarget("no agent labelled " + label);
}

LinkId link_between(const Network& net, const std::string& from,
                    const std::string& to) {
  const AgentId f = agent_by_label(net, from);
  const AgentId t = agent_by_label(net, to);
  for (const auto& l : net.links) {
    if (l.from == f && l.to == t) return l.id;
  }
  throw UnresolvedTarget("no link " + from + " -> " + to);
}

enum class Level { Normal, Medium, Heavy };

std::vector<DisruptionEvent> infrastructure_events(const Network& net, Level level,
                                                   const Severity& sev) {
  std::vector<DisruptionEvent> out;
  if (level == Level::Normal) return out;
  out.push_back({LinkBreak{link_between(net, "A0", "A3")}, std::nullopt});
  out.push_back({LinkBreak{link_between(net, "A0", "A4")}, std::nullopt});
  if (level == Level::Heavy) {
    out.push_back({LinkCostScale{link_between(net, "A2", "A1"), {}, sev.heavy_link_cost},
                   std::nullopt});
  }
  return out;
}

std::vector<DisruptionEvent> production_events(const Network& net, Level level,
                                               const Severity& sev) {
  std::vector<DisruptionEvent> out;
  if (level == Level::Normal) return out;
  const double f = level == Level::Medium ? sev.medium_matrix : sev.heavy_matrix;
  for (const char* label : {"A1", "A2", "A3", "A4", "A5"}) {
    const AgentId a = agent_by_label(net, label);
    for (ResourceIndex c = 0; c < net.resource_count(); ++c) {
      if (net.agents[a].tech.column_is_zero(c)) continue;
      out.push_back({MatrixColumnScale{a, c, f}, std::nullopt});
    }
  }
  return out;
}

}  // namespace

ScenarioSpec build_paper_scenario(int id, const Network& base,
                                  const Severity& severity) {
  // Table layout: rows are infrastructure severity, columns production.
  static const std::pair<Level, Level> kLayout[] = {
      {Level::Normal, Level::Normal},  // unused slot 0
      {Level::Medium, Level::Normal},  // 1
      {Level::Normal, Level::Medium},  // 2
      {Level::Medium, Level::Medium},  // 3
      {Level::Heavy, Level::Normal},   // 4
      {Level::Heavy, Level::Medium},   // 5
      {Level::Normal, Level::Heavy},   // 6
      {Level::Medium, Level::Heavy},   // 7
      {Level::Heavy, Level::Heavy},    // 8
  };
  if (id < 1 || id > 8) {
    throw UnknownScenario("unknown factorial scenario " + std::to_string(id));
  }
  const auto [infra, prod] = kLayout[id];
  ScenarioSpec spec;
  spec.name = "S" + std::to_string(id);
  spec.horizon = 1;
  for (auto& e : infrastructure_events(base, infra, severity)) {
    spec.timeline.push_back({1, std::move(e)});
  }
  for (auto& e : production_events(base, prod, severity)) {
    spec.timeline.push_back({1, std::move(e)});
  }
  return spec;
}

const std::vector<int>& severity_order() {
  static const std::vector<int> order{0, 1, 4, 2, 3, 5, 6, 7, 8};
  return order;
}

std::vector<SuiteEntry> paper_suite(const Network& base,
                                    const std::vector<double>& scales,
                                    const Severity& severity,
                                    const AllocateOptions& opts) {
  std::vector<SuiteEntry> out;
  const Grid<double> demands = final_demands(base);
  for (int id = 0; id <= 8; ++id) {
    Network net = base;
    SuiteEntry entry;
    entry.name = id == 0 ? "base" : "S" + std::to_string(id);
    if (id > 0) {
      for (const auto& te : build_paper_scenario(id, base, severity).timeline) {
        net = apply_event(net, te.event);
      }
    }
    const FlowState flow = allocate(net, demands, opts);
    entry.total_cost = total_cost(flow);
    entry.total_shortfall = total_shortfall(flow);
    entry.curve = supply_curve(net, demands, scales, opts, entry.name);
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace sosim
