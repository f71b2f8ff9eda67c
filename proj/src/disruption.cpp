#include "sosim/disruption.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sosim/errors.hpp"

namespace sosim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void need_link(const Network& net, LinkId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= net.link_count()) {
    throw UnresolvedTarget("no link with id " + std::to_string(id));
  }
}

void need_agent(const Network& net, AgentId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= net.agent_count()) {
    throw UnresolvedTarget("no agent with id " + std::to_string(id));
  }
}

void need_resource(const Network& net, ResourceIndex r) {
  if (r >= net.resource_count()) {
    throw UnresolvedTarget("no resource with index " + std::to_string(r));
  }
}

void need_resources(const Network& net, const ResourceSet& rs) {
  for (ResourceIndex r : rs) need_resource(net, r);
}

void need_factor(double f, bool strictly_positive) {
  if (!std::isfinite(f) || f < 0.0 || (strictly_positive && f == 0.0)) {
    std::ostringstream msg;
    msg << "invalid scale factor " << f;
    throw ValidationError(msg.str());
  }
}

ResourceSet expand(const Network& net, const ResourceSet& rs) {
  if (!rs.empty()) return rs;
  ResourceSet all(net.resource_count());
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
  return all;
}

std::string join(const ResourceSet& rs) {
  if (rs.empty()) return "*";
  std::string out;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(rs[k]);
  }
  return out;
}

}  // namespace

std::string describe(const DisruptionEvent& e) {
  std::ostringstream out;
  std::visit(
      overloaded{
          [&](const LinkBreak& k) { out << "LinkBreak(link=" << k.link << ")"; },
          [&](const LinkCostScale& k) {
            out << "LinkCostScale(link=" << k.link << ", r=" << join(k.resources)
                << ", x" << k.factor << ")";
          },
          [&](const LinkCapacityScale& k) {
            out << "LinkCapacityScale(link=" << k.link
                << ", r=" << join(k.resources) << ", x" << k.factor << ")";
          },
          [&](const MatrixCellScale& k) {
            out << "MatrixCellScale(agent=" << k.agent << ", " << k.row << ","
                << k.col << ", x" << k.factor << ")";
          },
          [&](const MatrixRowScale& k) {
            out << "MatrixRowScale(agent=" << k.agent << ", row=" << k.row
                << ", x" << k.factor << ")";
          },
          [&](const MatrixColumnScale& k) {
            out << "MatrixColumnScale(agent=" << k.agent << ", col=" << k.col
                << ", x" << k.factor << ")";
          },
          [&](const DemandScale& k) {
            out << "DemandScale(agent=" << k.agent << ", r=" << join(k.resources)
                << ", x" << k.factor << ")";
          },
      },
      e.kind);
  if (e.duration) {
    out << " for " << *e.duration;
  } else {
    out << " permanent";
  }
  return out.str();
}

void check_event(const Network& net, const DisruptionEvent& e) {
  if (e.duration && *e.duration < 1) {
    throw ValidationError("event duration must be at least one timestep");
  }
  std::visit(overloaded{
                 [&](const LinkBreak& k) { need_link(net, k.link); },
                 [&](const LinkCostScale& k) {
                   need_link(net, k.link);
                   need_resources(net, k.resources);
                   need_factor(k.factor, true);
                 },
                 [&](const LinkCapacityScale& k) {
                   need_link(net, k.link);
                   need_resources(net, k.resources);
                   need_factor(k.factor, false);
                 },
                 [&](const MatrixCellScale& k) {
                   need_agent(net, k.agent);
                   need_resource(net, k.row);
                   need_resource(net, k.col);
                   need_factor(k.factor, false);
                 },
                 [&](const MatrixRowScale& k) {
                   need_agent(net, k.agent);
                   need_resource(net, k.row);
                   need_factor(k.factor, false);
                 },
                 [&](const MatrixColumnScale& k) {
                   need_agent(net, k.agent);
                   need_resource(net, k.col);
                   need_factor(k.factor, false);
                 },
                 [&](const DemandScale& k) {
                   need_agent(net, k.agent);
                   need_resources(net, k.resources);
                   need_factor(k.factor, false);
                 },
             },
             e.kind);
}

Network apply_event(const Network& net, const DisruptionEvent& e) {
  check_event(net, e);
  Network out = net;
  const std::size_t R = net.resource_count();
  std::visit(
      overloaded{
          [&](const LinkBreak& k) {
            InfraLink& link = out.links[k.link];
            link.transport_cost.assign(R, Cost::unavailable());
            link.capacity.assign(R, Capacity{0.0});
          },
          [&](const LinkCostScale& k) {
            InfraLink& link = out.links[k.link];
            for (ResourceIndex r : expand(net, k.resources)) {
              Cost& c = link.transport_cost[r];
              if (c.available()) c = Cost{c.value() * k.factor};
            }
          },
          [&](const LinkCapacityScale& k) {
            InfraLink& link = out.links[k.link];
            for (ResourceIndex r : expand(net, k.resources)) {
              Capacity& c = link.capacity[r];
              if (c.bounded()) {
                c = Capacity{c.limit() * k.factor};
              } else if (k.factor == 0.0) {
                c = Capacity{0.0};
              }
            }
          },
          [&](const MatrixCellScale& k) {
            out.agents[k.agent].tech(k.row, k.col) *= k.factor;
          },
          [&](const MatrixRowScale& k) {
            TechnologyMatrix& A = out.agents[k.agent].tech;
            for (ResourceIndex j = 0; j < R; ++j) A(k.row, j) *= k.factor;
          },
          [&](const MatrixColumnScale& k) {
            TechnologyMatrix& A = out.agents[k.agent].tech;
            for (ResourceIndex i = 0; i < R; ++i) A(i, k.col) *= k.factor;
          },
          [&](const DemandScale& k) {
            auto& d = out.agents[k.agent].final_demand;
            for (ResourceIndex r : expand(net, k.resources)) d[r] *= k.factor;
          },
      },
      e.kind);
  return out;
}

Network revert_event(const Network& net, const Network& baseline,
                     const DisruptionEvent& e) {
  check_event(net, e);
  check_event(baseline, e);
  Network out = net;
  const std::size_t R = net.resource_count();
  std::visit(
      overloaded{
          [&](const LinkBreak& k) {
            out.links[k.link].transport_cost = baseline.links[k.link].transport_cost;
            out.links[k.link].capacity = baseline.links[k.link].capacity;
          },
          [&](const LinkCostScale& k) {
            for (ResourceIndex r : expand(net, k.resources)) {
              out.links[k.link].transport_cost[r] =
                  baseline.links[k.link].transport_cost[r];
            }
          },
          [&](const LinkCapacityScale& k) {
            for (ResourceIndex r : expand(net, k.resources)) {
              out.links[k.link].capacity[r] = baseline.links[k.link].capacity[r];
            }
          },
          [&](const MatrixCellScale& k) {
            out.agents[k.agent].tech(k.row, k.col) =
                baseline.agents[k.agent].tech(k.row, k.col);
          },
          [&](const MatrixRowScale& k) {
            for (ResourceIndex j = 0; j < R; ++j) {
              out.agents[k.agent].tech(k.row, j) = baseline.agents[k.agent].tech(k.row, j);
            }
          },
          [&](const MatrixColumnScale& k) {
            for (ResourceIndex i = 0; i < R; ++i) {
              out.agents[k.agent].tech(i, k.col) = baseline.agents[k.agent].tech(i, k.col);
            }
          },
          [&](const DemandScale& k) {
            for (ResourceIndex r : expand(net, k.resources)) {
              out.agents[k.agent].final_demand[r] =
                  baseline.agents[k.agent].final_demand[r];
            }
          },
      },
      e.kind);
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(EventType t) {
  switch (t) {
    case EventType::LinkBreak: return "LinkBreak";
    case EventType::LinkCostScale: return "LinkCostScale";
    case EventType::LinkCapacityScale: return "LinkCapacityScale";
    case EventType::MatrixCellScale: return "MatrixCellScale";
    case EventType::MatrixRowScale: return "MatrixRowScale";
    case EventType::MatrixColumnScale: return "MatrixColumnScale";
    case EventType::DemandScale: return "DemandScale";
  }
  return "?";
}

std::optional<EventType> event_type_from(std::string_view name) {
  for (EventType t : {EventType::LinkBreak, EventType::LinkCostScale,
                      EventType::LinkCapacityScale, EventType::MatrixCellScale,
                      EventType::MatrixRowScale, EventType::MatrixColumnScale,
                      EventType::DemandScale}) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::geometric(double p) {
  if (p >= 1.0) return 1;
  int n = 1;
  while (!bernoulli(p) && n < (1 << 30)) ++n;
  return n;
}

GeneratorState initial_state(const Generator& g) {
  return GeneratorState{Rng(g.seed), {}};
}

DisruptionEvent make_event(const EventTemplate& tpl, int target,
                           double magnitude, std::optional<int> duration) {
  DisruptionEvent e;
  e.duration = duration;
  switch (tpl.type) {
    case EventType::LinkBreak:
      e.kind = LinkBreak{target};
      break;
    case EventType::LinkCostScale:
      e.kind = LinkCostScale{target, tpl.resources, magnitude};
      break;
    case EventType::LinkCapacityScale:
      e.kind = LinkCapacityScale{target, tpl.resources, magnitude};
      break;
    case EventType::MatrixCellScale:
      e.kind = MatrixCellScale{target, tpl.row, tpl.col, magnitude};
      break;
    case EventType::MatrixRowScale:
      e.kind = MatrixRowScale{target, tpl.row, magnitude};
      break;
    case EventType::MatrixColumnScale:
      e.kind = MatrixColumnScale{target, tpl.col, magnitude};
      break;
    case EventType::DemandScale:
      e.kind = DemandScale{target, tpl.resources, magnitude};
      break;
  }
  return e;
}

void check_generator(const Network& net, const Generator& g) {
  if (!(g.onset_prob >= 0.0 && g.onset_prob <= 1.0)) {
    throw ValidationError("generator '" + g.name + "': onset probability outside [0,1]");
  }
  if (!(g.magnitude_lo <= g.magnitude_hi) || !std::isfinite(g.magnitude_lo) ||
      !std::isfinite(g.magnitude_hi)) {
    throw ValidationError("generator '" + g.name + "': bad magnitude interval");
  }
  if (const auto* geo = std::get_if<GeometricDuration>(&g.duration)) {
    if (!(geo->p > 0.0 && geo->p <= 1.0)) {
      throw ValidationError("generator '" + g.name + "': geometric p outside (0,1]");
    }
  }
  if (const auto* fixed = std::get_if<FixedDuration>(&g.duration)) {
    if (fixed->steps < 1) {
      throw ValidationError("generator '" + g.name + "': duration below one step");
    }
  }
  // Both interval ends must produce a valid event on every target.
  for (int target : g.targets) {
    check_event(net, make_event(g.kind, target, g.magnitude_lo, 1));
    check_event(net, make_event(g.kind, target, g.magnitude_hi, 1));
  }
}

GeneratorStep generator_step(const Generator& g, int t, GeneratorState state) {
  GeneratorStep out;
  std::vector<ActiveEvent> still;
  for (auto& a : state.active) {
    if (a.end <= t) {
      out.ended.push_back(a.event);
    } else {
      still.push_back(std::move(a));
    }
  }
  state.active = std::move(still);

  for (int target : g.targets) {
    bool busy = false;
    for (const auto& a : state.active) busy = busy || a.target == target;
    if (busy) continue;
    if (!state.rng.bernoulli(g.onset_prob)) continue;
    const double magnitude = state.rng.uniform(g.magnitude_lo, g.magnitude_hi);
    std::optional<int> steps;
    if (const auto* fixed = std::get_if<FixedDuration>(&g.duration)) {
      steps = fixed->steps;
    } else if (const auto* geo = std::get_if<GeometricDuration>(&g.duration)) {
      steps = state.rng.geometric(geo->p);
    }
    DisruptionEvent e = make_event(g.kind, target, magnitude, steps);
    const int end = steps ? t + *steps : std::numeric_limits<int>::max();
    state.active.push_back({target, end, e});
    out.started.push_back(std::move(e));
  }
  out.state = std::move(state);
  return out;
}

}  // namespace sosim
