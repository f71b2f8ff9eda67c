#include "sosim/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "sosim/errors.hpp"

namespace sosim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSccSweepLimit = 200000;

struct Routing {
  ResourceSet made;
  std::vector<char> in_made;
  std::optional<LeontiefSystem> system;
};

// Per-pass quantities. `request` doubles as the link flow once a pass is final.
struct Pass {
  Grid<double> request;   // links x resources
  Grid<double> provider;  // agents x resources
  Grid<double> demand;    // agents x resources, final demand plus outflows
  std::vector<ProductionPlan> plans;
};

// Who-buys-from-whom structure implied by a PriceState.
class DecisionGraph {
 public:
  DecisionGraph(const Network& net, const PriceState& prices)
      : net_(net),
        prices_(prices),
        index_(LinkIndex::build(net)),
        R_(net.resource_count()),
        N_(net.agent_count()),
        L_(net.link_count()) {
    routing_.resize(N_);
    for (std::size_t n = 0; n < N_; ++n) {
      Routing& rt = routing_[n];
      rt.in_made.assign(R_, 0);
      for (std::size_t r = 0; r < R_; ++r) {
        if (prices.decision(n, r).kind == SourceKind::Make) {
          rt.made.push_back(r);
          rt.in_made[r] = 1;
        }
      }
      if (!rt.made.empty()) rt.system.emplace(net.agents[n].tech, rt.made);
    }
    build_sccs();
    // Consumers of each origin in rationing order: priority, then id.
    ordered_out_.resize(N_);
    for (std::size_t n = 0; n < N_; ++n) {
      ordered_out_[n] = index_.outgoing[n];
      std::stable_sort(ordered_out_[n].begin(), ordered_out_[n].end(),
                       [&](LinkId a, LinkId b) {
                         return net.links[a].priority < net.links[b].priority;
                       });
    }
  }

  Pass demand_pass(const Grid<double>& final_demand,
                   const Grid<double>* caps) const {
    Pass pass{Grid<double>(L_, R_, 0.0), Grid<double>(N_, R_, 0.0),
              Grid<double>(N_, R_, 0.0),
              std::vector<ProductionPlan>(N_, zero_plan(R_))};
    // Downstream first: reverse of the upstream-first component order.
    for (auto it = sccs_.rbegin(); it != sccs_.rend(); ++it) {
      const auto& comp = *it;
      if (comp.size() == 1) {
        agent_demand(comp.front(), final_demand, caps, pass);
        continue;
      }
      int sweeps = 0;
      for (;;) {
        double change = 0.0;
        double scale = 0.0;
        for (AgentId n : comp) {
          const auto [c, s] = agent_demand(n, final_demand, caps, pass);
          change = std::max(change, c);
          scale = std::max(scale, s);
        }
        if (change <= 1e-15 * (1.0 + scale)) break;
        if (++sweeps > kSccSweepLimit || !(scale < 1e200)) {
          throw NonConvergence("demand propagation around a supply loop did not settle");
        }
      }
    }
    return pass;
  }

  // Upstream-first hand-out of what each origin can actually deliver.
  // Returns the final demand each agent ends up serving.
  Grid<double> supply_pass(const Pass& pass,
                           const Grid<double>& final_demand) const {
    Grid<double> given = pass.request;
    Grid<double> served(N_, R_, 0.0);
    for (const auto& comp : sccs_) {
      if (comp.size() == 1) {
        agent_supply(comp.front(), pass, final_demand, given, served);
        continue;
      }
      int sweeps = 0;
      for (;;) {
        double change = 0.0;
        double scale = 0.0;
        for (AgentId n : comp) {
          const auto [c, s] = agent_supply(n, pass, final_demand, given, served);
          change = std::max(change, c);
          scale = std::max(scale, s);
        }
        if (change <= 1e-15 * (1.0 + scale)) break;
        if (++sweeps > kSccSweepLimit) {
          throw NonConvergence("rationing around a supply loop did not settle");
        }
      }
    }
    return served;
  }

  FlowState to_state(const Pass& pass, const Grid<double>& served,
                     const Grid<double>& wanted) const {
    FlowState st;
    st.edge_flow = pass.request;
    st.production = pass.plans;
    st.provider_draw = pass.provider;
    st.self_supply = Grid<double>(N_, R_, 0.0);
    st.import_inflow = Grid<double>(N_, R_, 0.0);
    st.delivered_cost = prices_.sell_cost;
    st.served = served;
    st.shortfall = Grid<double>(N_, R_, 0.0);
    for (std::size_t n = 0; n < N_; ++n) {
      for (ResourceIndex r : routing_[n].made) {
        st.self_supply(n, r) = pass.plans[n].input_requirement[r];
      }
      for (std::size_t r = 0; r < R_; ++r) {
        st.shortfall(n, r) = std::max(0.0, wanted(n, r) - served(n, r));
      }
    }
    for (const auto& link : net_.links) {
      for (std::size_t r = 0; r < R_; ++r) {
        st.import_inflow(link.to, r) += pass.request(link.id, r);
      }
    }
    st.iterations = 1;
    return st;
  }

  std::size_t links() const { return L_; }

 private:
  // Returns (largest change written, largest magnitude written).
  std::pair<double, double> agent_demand(AgentId n,
                                         const Grid<double>& final_demand,
                                         const Grid<double>* caps,
                                         Pass& pass) const {
    const Routing& rt = routing_[n];
    std::vector<double> D(R_, 0.0);
    for (std::size_t r = 0; r < R_; ++r) {
      double d = final_demand(n, r);
      for (LinkId e : index_.outgoing[n]) d += pass.request(e, r);
      D[r] = d;
      pass.demand(n, r) = d;
    }
    if (rt.system) {
      std::vector<double> Dm(R_, 0.0);
      for (ResourceIndex r : rt.made) Dm[r] = D[r];
      pass.plans[n] = rt.system->solve(Dm);
    } else {
      pass.plans[n] = zero_plan(R_);
    }
    const ProductionPlan& plan = pass.plans[n];

    double change = 0.0;
    double scale = 0.0;
    auto write = [&](double& slot, double value) {
      change = std::max(change, std::abs(slot - value));
      scale = std::max(scale, std::abs(value));
      slot = value;
    };
    for (std::size_t r = 0; r < R_; ++r) {
      if (rt.in_made[r]) continue;
      const double ext = plan.input_requirement[r] + D[r];
      const SourceDecision& d = prices_.decision(n, r);
      switch (d.kind) {
        case SourceKind::Provider:
          write(pass.provider(n, r), ext);
          break;
        case SourceKind::Edge: {
          const double cap = caps ? (*caps)(d.link, r) : kInf;
          write(pass.request(d.link, r), std::min(ext, cap));
          break;
        }
        case SourceKind::None:
          if (ext > 0.0) {
            std::ostringstream msg;
            msg << "agent " << net_.agents[n].label << " needs "
                << net_.catalog.name(r) << " but no priced source exists";
            throw UnpricedDemand(msg.str());
          }
          break;
        case SourceKind::Make:
          break;
      }
    }
    return {change, scale};
  }

  std::pair<double, double> agent_supply(AgentId u, const Pass& pass,
                                         const Grid<double>& final_demand,
                                         Grid<double>& given,
                                         Grid<double>& served) const {
    const Routing& rt = routing_[u];
    const ProductionPlan& plan = pass.plans[u];
    const Agent& agent = net_.agents[u];

    // Production draws its inputs first; the scarcest import sets the
    // fraction of the plan that can run.
    double theta = 1.0;
    for (std::size_t i = 0; i < R_; ++i) {
      const double need = plan.input_requirement[i];
      if (rt.in_made[i] || need <= 0.0) continue;
      const SourceDecision& d = prices_.decision(u, i);
      if (d.kind == SourceKind::Edge) {
        theta = std::min(theta, given(d.link, i) / need);
      }
    }
    theta = std::max(0.0, theta);

    double change = 0.0;
    double scale = 0.0;
    for (std::size_t r = 0; r < R_; ++r) {
      double avail = 0.0;
      const SourceDecision& d = prices_.decision(u, r);
      if (rt.in_made[r]) {
        avail = theta * pass.demand(u, r);
      } else if (d.kind == SourceKind::Edge) {
        avail = std::max(0.0, given(d.link, r) -
                                  theta * plan.input_requirement[r]);
      } else if (d.kind == SourceKind::Provider) {
        avail = pass.demand(u, r);
      }

      bool fd_done = false;
      auto serve_final = [&] {
        const double give = std::min(final_demand(u, r), avail);
        avail -= give;
        served(u, r) = give;
        fd_done = true;
      };
      for (LinkId e : ordered_out_[u]) {
        if (!fd_done && agent.final_demand_priority <= net_.links[e].priority) {
          serve_final();
        }
        const double want = pass.request(e, r);
        const double give = std::min(want, avail);
        avail -= give;
        change = std::max(change, std::abs(given(e, r) - give));
        scale = std::max(scale, give);
        given(e, r) = give;
      }
      if (!fd_done) serve_final();
    }
    return {change, scale};
  }

  // Iterative Tarjan over "n requests from m". Components come out
  // upstream-first: a component is emitted after everything it buys from.
  void build_sccs() {
    std::vector<std::vector<AgentId>> adj(N_);
    for (std::size_t n = 0; n < N_; ++n) {
      for (std::size_t r = 0; r < R_; ++r) {
        const SourceDecision& d = prices_.decision(n, r);
        if (d.kind == SourceKind::Edge) adj[n].push_back(net_.links[d.link].from);
      }
      std::sort(adj[n].begin(), adj[n].end());
      adj[n].erase(std::unique(adj[n].begin(), adj[n].end()), adj[n].end());
    }

    std::vector<int> index(N_, -1), low(N_, 0);
    std::vector<char> on_stack(N_, 0);
    std::vector<AgentId> stack;
    int counter = 0;
    struct Frame {
      AgentId node;
      std::size_t next;
    };
    for (std::size_t root = 0; root < N_; ++root) {
      if (index[root] != -1) continue;
      std::vector<Frame> frames{{static_cast<AgentId>(root), 0}};
      index[root] = low[root] = counter++;
      stack.push_back(static_cast<AgentId>(root));
      on_stack[root] = 1;
      while (!frames.empty()) {
        Frame& f = frames.back();
        const AgentId v = f.node;
        if (f.next < adj[v].size()) {
          const AgentId w = adj[v][f.next++];
          if (index[w] == -1) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = 1;
            frames.push_back({w, 0});
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], index[w]);
          }
          continue;
        }
        if (low[v] == index[v]) {
          std::vector<AgentId> comp;
          AgentId w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp.push_back(w);
          } while (w != v);
          std::sort(comp.begin(), comp.end());
          sccs_.push_back(std::move(comp));
        }
        frames.pop_back();
        if (!frames.empty()) {
          const AgentId parent = frames.back().node;
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }

  const Network& net_;
  const PriceState& prices_;
  LinkIndex index_;
  std::size_t R_;
  std::size_t N_;
  std::size_t L_;
  std::vector<Routing> routing_;
  std::vector<std::vector<AgentId>> sccs_;
  std::vector<std::vector<LinkId>> ordered_out_;
};

void check_demands(const Network& net, const Grid<double>& demands) {
  if (demands.rows() != net.agent_count() ||
      demands.cols() != net.resource_count()) {
    throw std::invalid_argument("demand table must be agents x resources");
  }
  for (double d : demands.values()) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("demands must be finite and nonnegative");
    }
  }
}

Grid<double> capacity_grid(const Network& net) {
  Grid<double> caps(net.link_count(), net.resource_count(), kInf);
  for (const auto& link : net.links) {
    for (std::size_t r = 0; r < net.resource_count(); ++r) {
      caps(link.id, r) = link.capacity[r].as_double();
    }
  }
  return caps;
}

FlowState ration_with(const DecisionGraph& graph, const Grid<double>& wanted,
                      const Grid<double>& caps) {
  const Pass capped = graph.demand_pass(wanted, &caps);
  Grid<double> served = graph.supply_pass(capped, wanted);
  Pass final_pass = graph.demand_pass(served, nullptr);

  // The served quantities are reachable within the capped hand-out, so the
  // re-propagated flows stay under capacity; guard against rounding only.
  double shrink = 1.0;
  for (std::size_t e = 0; e < caps.rows(); ++e) {
    for (std::size_t r = 0; r < caps.cols(); ++r) {
      const double flow = final_pass.request(e, r);
      const double cap = caps(e, r);
      if (flow > cap && flow > 0.0) shrink = std::min(shrink, cap / flow);
    }
  }
  if (shrink < 1.0) {
    for (double& s : served.values()) s *= shrink;
    final_pass = graph.demand_pass(served, nullptr);
  }
  return graph.to_state(final_pass, served, wanted);
}

void add_into(Grid<double>& acc, const Grid<double>& part) {
  auto a = acc.values();
  auto p = part.values();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += p[k];
}

void add_plan(ProductionPlan& acc, const ProductionPlan& part) {
  for (std::size_t r = 0; r < acc.gross_output.size(); ++r) {
    acc.gross_output[r] += part.gross_output[r];
    acc.external_demand[r] += part.external_demand[r];
    acc.input_requirement[r] += part.input_requirement[r];
  }
}

bool active(const FlowState& st, std::size_t n, std::size_t r) {
  return st.served(n, r) > 0.0 || st.provider_draw(n, r) > 0.0 ||
         st.import_inflow(n, r) > 0.0 || st.production[n].gross_output[r] > 0.0;
}

double sum(const Grid<double>& g) {
  double s = 0.0;
  for (double v : g.values()) s += v;
  return s;
}

}  // namespace

FlowState empty_flow(const Network& net) {
  const std::size_t R = net.resource_count();
  const std::size_t N = net.agent_count();
  FlowState st;
  st.edge_flow = Grid<double>(net.link_count(), R, 0.0);
  st.production.assign(N, zero_plan(R));
  st.provider_draw = Grid<double>(N, R, 0.0);
  st.self_supply = Grid<double>(N, R, 0.0);
  st.import_inflow = Grid<double>(N, R, 0.0);
  st.delivered_cost = Grid<Cost>(N, R);
  st.served = Grid<double>(N, R, 0.0);
  st.shortfall = Grid<double>(N, R, 0.0);
  return st;
}

FlowState plan_quantities(const Network& net, const PriceState& prices,
                          const Grid<double>& demands) {
  check_demands(net, demands);
  DecisionGraph graph(net, prices);
  const Pass pass = graph.demand_pass(demands, nullptr);
  return graph.to_state(pass, demands, demands);
}

FlowState ration(const Network& net, const PriceState& prices,
                 const FlowState& tentative) {
  Grid<double> wanted = tentative.served;
  add_into(wanted, tentative.shortfall);
  check_demands(net, wanted);
  DecisionGraph graph(net, prices);
  return ration_with(graph, wanted, capacity_grid(net));
}

FlowState allocate(const Network& net, const Grid<double>& demands,
                   const AllocateOptions& opts) {
  require_valid(net);
  check_demands(net, demands);
  const std::size_t R = net.resource_count();
  const std::size_t N = net.agent_count();
  const std::size_t L = net.link_count();
  const double tol = opts.tolerance;

  FlowState total = empty_flow(net);
  Grid<double> residual = demands;
  const Grid<double> original_caps = capacity_grid(net);
  Grid<double> caps_left = original_caps;
  Grid<char> blocked(L, R, 0);
  Network work = net;
  const double demand_scale = 1.0 + sum(demands);

  int round = 0;
  for (;;) {
    if (round >= opts.max_rounds) {
      throw NonConvergence("allocation did not settle within " +
                           std::to_string(opts.max_rounds) + " rounds");
    }
    ++round;
    const PriceState prices = price_fixed_point(work, opts.pricing);
    if (round == 1) total.delivered_cost = prices.sell_cost;

    // Only residual demand that still has a priced source re-enters; the
    // first round passes everything so unpriced demand surfaces as an error.
    Grid<double> wanted(N, R, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t r = 0; r < R; ++r) {
        if (residual(n, r) <= 0.0) continue;
        if (round == 1 || prices.sell_cost(n, r).available()) {
          wanted(n, r) = residual(n, r);
        }
      }
    }
    if (sum(wanted) <= 0.0) break;

    DecisionGraph graph(work, prices);
    const FlowState step = ration_with(graph, wanted, caps_left);

    add_into(total.edge_flow, step.edge_flow);
    add_into(total.provider_draw, step.provider_draw);
    add_into(total.self_supply, step.self_supply);
    add_into(total.import_inflow, step.import_inflow);
    add_into(total.served, step.served);
    for (std::size_t n = 0; n < N; ++n) {
      add_plan(total.production[n], step.production[n]);
      for (std::size_t r = 0; r < R; ++r) {
        if (round > 1 && active(step, n, r)) {
          total.delivered_cost(n, r) = prices.sell_cost(n, r);
        }
        residual(n, r) = std::max(0.0, residual(n, r) - step.served(n, r));
      }
    }

    int newly_blocked = 0;
    for (std::size_t e = 0; e < L; ++e) {
      for (std::size_t r = 0; r < R; ++r) {
        if (blocked(e, r) || !std::isfinite(original_caps(e, r))) continue;
        caps_left(e, r) = std::max(0.0, caps_left(e, r) - step.edge_flow(e, r));
        if (caps_left(e, r) <= tol * (1.0 + original_caps(e, r))) {
          caps_left(e, r) = 0.0;
          blocked(e, r) = 1;
          work.links[e].transport_cost[r] = Cost::unavailable();
          ++newly_blocked;
        }
      }
    }

    if (!opts.spill) break;
    if (sum(residual) <= tol * demand_scale) break;
    if (newly_blocked == 0) break;
  }

  total.iterations = round;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t r = 0; r < R; ++r) {
      const double gap = demands(n, r) - total.served(n, r);
      // round-off from the supply pass is not a shortage
      total.shortfall(n, r) = gap > tol * (1.0 + demands(n, r)) ? gap : 0.0;
    }
  }
  return total;
}

FlowState allocate(const Network& net, const AllocateOptions& opts) {
  return allocate(net, final_demands(net), opts);
}

double conservation_error(const Network& net, const FlowState& st) {
  const std::size_t R = net.resource_count();
  Grid<double> balance(net.agent_count(), R, 0.0);
  for (const auto& link : net.links) {
    for (std::size_t r = 0; r < R; ++r) {
      balance(link.to, r) += st.edge_flow(link.id, r);
      balance(link.from, r) -= st.edge_flow(link.id, r);
    }
  }
  double worst = 0.0;
  for (std::size_t n = 0; n < net.agent_count(); ++n) {
    const ProductionPlan& p = st.production[n];
    for (std::size_t r = 0; r < R; ++r) {
      const double b = balance(n, r) + p.gross_output[r] + st.provider_draw(n, r) -
                       p.input_requirement[r] - st.served(n, r);
      worst = std::max(worst, std::abs(b));
    }
  }
  return worst;
}

double capacity_excess(const Network& net, const FlowState& st) {
  double worst = -kInf;
  for (const auto& link : net.links) {
    for (std::size_t r = 0; r < net.resource_count(); ++r) {
      if (!link.capacity[r].bounded()) continue;
      worst = std::max(worst, st.edge_flow(link.id, r) - link.capacity[r].limit());
    }
  }
  return std::isfinite(worst) ? worst : 0.0;
}

double unavailable_flow(const Network& net, const FlowState& st) {
  double total = 0.0;
  for (const auto& link : net.links) {
    for (std::size_t r = 0; r < net.resource_count(); ++r) {
      if (!link.transport_cost[r].available()) total += st.edge_flow(link.id, r);
    }
  }
  return total;
}

}  // namespace sosim
