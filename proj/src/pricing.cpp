#include "sosim/pricing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "sosim/errors.hpp"
#include "sosim/production.hpp"

namespace sosim {

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::None: return "none";
    case SourceKind::Make: return "make";
    case SourceKind::Provider: return "provider";
    case SourceKind::Edge: return "edge";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double raw(const Cost& c) { return c.available() ? c.value() : kInf; }
Cost wrap(double v) { return std::isfinite(v) ? Cost{v} : Cost::unavailable(); }

bool within(double candidate, double best, double tol) {
  return candidate <= best + tol * (1.0 + std::abs(best));
}

// Nonzero entries of each producible column, cached once per network.
struct Recipe {
  ResourceSet producible;
  std::vector<std::vector<std::pair<ResourceIndex, double>>> inputs;  // by output
};

Recipe build_recipe(const Agent& agent) {
  Recipe out;
  const std::size_t R = agent.tech.size();
  out.inputs.resize(R);
  for (ResourceIndex r = 0; r < R; ++r) {
    for (ResourceIndex i = 0; i < R; ++i) {
      const double a = agent.tech(i, r);
      if (a > 0.0) out.inputs[r].emplace_back(i, a);
    }
    if (!out.inputs[r].empty()) out.producible.push_back(r);
  }
  return out;
}

double make_raw(const Recipe& recipe, ResourceIndex r,
                const std::vector<double>& c) {
  double total = 0.0;
  for (auto [i, a] : recipe.inputs[r]) {
    if (!std::isfinite(c[i])) return kInf;
    total += a * c[i];
  }
  return total;
}

bool improves(double candidate, double current) {
  if (!std::isfinite(candidate)) return false;
  if (!std::isfinite(current)) return true;
  return candidate < current - 1e-14 * (1.0 + std::abs(current));
}

class Pricer {
 public:
  Pricer(const Network& net, const PricingOptions& opts)
      : net_(net),
        opts_(opts),
        index_(LinkIndex::build(net)),
        R_(net.resource_count()),
        N_(net.agent_count()),
        sell_(N_ * R_, kInf) {
    recipes_.reserve(N_);
    for (const auto& agent : net.agents) recipes_.push_back(build_recipe(agent));
  }

  PriceState run() {
    std::vector<AgentId> order = opts_.order;
    if (order.empty()) {
      order.resize(N_);
      std::iota(order.begin(), order.end(), 0);
    }
    if (order.size() != N_) {
      throw std::invalid_argument("pricing order must be a permutation of agents");
    }

    const long limit = std::max<long>(1, long(opts_.sweeps_per_agent) * long(N_));
    long sweeps = 0;
    bool converged = false;
    while (sweeps < limit) {
      ++sweeps;
      double delta = 0.0;
      double relative = 0.0;
      bool appeared = false;
      for (AgentId n : order) relax(n, delta, relative, appeared);
      if (delta < opts_.tolerance && !appeared) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "price iteration did not converge within " << limit
          << " sweeps (cost cycle with gain >= 1?)";
      throw NonConvergence(msg.str());
    }
    // Tighten to near machine precision so downstream tie detection is clean.
    for (long k = 0; k < limit; ++k) {
      double delta = 0.0;
      double relative = 0.0;
      bool appeared = false;
      ++sweeps;
      for (AgentId n : order) relax(n, delta, relative, appeared);
      if (relative <= 1e-15 && !appeared) break;
    }

    PriceState state = empty_prices(net_);
    state.sweeps_used = static_cast<int>(sweeps);
    for (std::size_t n = 0; n < N_; ++n) {
      for (std::size_t r = 0; r < R_; ++r) state.sell_cost(n, r) = wrap(at(n, r));
    }
    record_decisions(state);
    return state;
  }

 private:
  double& at(std::size_t n, std::size_t r) { return sell_[n * R_ + r]; }
  double at(std::size_t n, std::size_t r) const { return sell_[n * R_ + r]; }

  void acquire(AgentId n, std::vector<double>& a) const {
    const Agent& agent = net_.agents[n];
    for (std::size_t r = 0; r < R_; ++r) a[r] = raw(agent.provider_costs[r]);
    for (LinkId id : index_.incoming[n]) {
      const InfraLink& link = net_.links[id];
      for (std::size_t r = 0; r < R_; ++r) {
        const Cost& tc = link.transport_cost[r];
        if (!tc.available()) continue;
        const double via = at(link.from, r) + tc.value();
        if (via < a[r]) a[r] = via;
      }
    }
  }

  // Exact prices for a fixed make-set: (I - A_MM^T) c_M = b.
  bool policy_solve(const Recipe& recipe, const ResourceSet& made, const std::vector<char>& in_made,
                    std::vector<double>& c) const {
    const auto m = static_cast<Eigen::Index>(made.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::Index> slot(R_, -1);
    for (Eigen::Index k = 0; k < m; ++k) slot[made[k]] = k;
    for (Eigen::Index k = 0; k < m; ++k) {
      for (auto [i, a] : recipe.inputs[made[k]]) {
        if (in_made[i]) {
          M(k, slot[i]) -= a;
        } else {
          if (!std::isfinite(c[i])) return false;
          b(k) += a * c[i];
        }
      }
    }
    Eigen::VectorXd y = M.partialPivLu().solve(b);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double old = c[made[k]];
      const double scale = 1.0 + std::abs(b(k));
      if (!std::isfinite(y(k)) || y(k) < -1e-9 * scale) return false;
      if (std::isfinite(old) && y(k) > old + 1e-9 * (1.0 + std::abs(old))) {
        return false;
      }
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      c[made[k]] = std::min(c[made[k]], std::max(0.0, y(k)));
    }
    return true;
  }

  void value_iterate(const Recipe& recipe, const std::vector<double>& a,
                     std::vector<double>& c) const {
    for (int it = 0; it < 10000; ++it) {
      double change = 0.0;
      for (ResourceIndex r : recipe.producible) {
        const double next = std::min(a[r], make_raw(recipe, r, c));
        if (next < c[r]) {
          change = std::max(change, std::isfinite(c[r])
                                        ? (c[r] - next) / (1.0 + std::abs(next))
                                        : 1.0);
          c[r] = next;
        }
      }
      if (change <= 1e-16) return;
    }
  }

  // Least fixed point of c = min(a, A^T c) for one agent, by policy iteration.
  void local_prices(AgentId n, const std::vector<double>& a,
                    std::vector<double>& c) const {
    const Recipe& recipe = recipes_[n];
    c = a;
    if (recipe.producible.empty()) return;
    std::vector<char> in_made(R_, 0);
    ResourceSet made;
    const int cap = 4 * static_cast<int>(R_) + 4;
    for (int it = 0; it < cap; ++it) {
      bool switched = false;
      for (ResourceIndex r : recipe.producible) {
        if (in_made[r]) continue;
        if (improves(make_raw(recipe, r, c), c[r])) {
          in_made[r] = 1;
          switched = true;
        }
      }
      if (!switched) return;
      made.clear();
      for (ResourceIndex r = 0; r < R_; ++r) {
        if (in_made[r]) made.push_back(r);
      }
      if (!policy_solve(recipe, made, in_made, c)) break;
    }
    value_iterate(recipe, a, c);
  }

  void relax(AgentId n, double& delta, double& relative, bool& appeared) {
    std::vector<double>& a = scratch_a_;
    std::vector<double>& c = scratch_c_;
    a.resize(R_);
    acquire(n, a);
    local_prices(n, a, c);
    for (std::size_t r = 0; r < R_; ++r) {
      double& cur = at(n, r);
      const double next = std::min(cur, c[r]);
      if (!std::isfinite(cur)) {
        if (std::isfinite(next)) appeared = true;
      } else {
        delta = std::max(delta, cur - next);
        relative = std::max(relative, (cur - next) / (1.0 + std::abs(cur)));
      }
      cur = next;
    }
  }

  void record_decisions(PriceState& state) const {
    const double tol = opts_.tie_tolerance;
    std::vector<char> needs_edge(N_ * R_, 0);

    for (std::size_t n = 0; n < N_; ++n) {
      const Agent& agent = net_.agents[n];
      const Recipe& recipe = recipes_[n];
      std::vector<double> own(sell_.begin() + n * R_, sell_.begin() + (n + 1) * R_);

      ResourceSet tied_make;
      ResourceSet strict_make;
      for (ResourceIndex r : recipe.producible) {
        const double best = own[r];
        if (!std::isfinite(best)) continue;
        const double mk = make_raw(recipe, r, own);
        if (!within(mk, best, tol)) continue;
        tied_make.push_back(r);
        if (!external_ties(static_cast<AgentId>(n), r, best)) strict_make.push_back(r);
      }
      ResourceSet made = tied_make;
      if (!made.empty() && !productivity_check(agent.tech, made).productive) {
        made = strict_make;
      }
      std::vector<char> in_made(R_, 0);
      for (ResourceIndex r : made) in_made[r] = 1;

      for (std::size_t r = 0; r < R_; ++r) {
        SourceDecision& d = state.decision(n, r);
        const double best = own[r];
        if (!std::isfinite(best)) {
          d = {};
          continue;
        }
        if (in_made[r]) {
          d = {SourceKind::Make, -1, wrap(make_raw(recipe, r, own))};
        } else if (agent.provider_costs[r].available() &&
                   within(agent.provider_costs[r].value(), best, tol)) {
          d = {SourceKind::Provider, -1, agent.provider_costs[r]};
        } else {
          needs_edge[n * R_ + r] = 1;
        }
      }
    }

    for (std::size_t r = 0; r < R_; ++r) settle_edges(state, r, needs_edge);
  }

  bool external_ties(AgentId n, ResourceIndex r, double best) const {
    const double tol = opts_.tie_tolerance;
    const Cost& p = net_.agents[n].provider_costs[r];
    if (p.available() && within(p.value(), best, tol)) return true;
    for (LinkId id : index_.incoming[n]) {
      const InfraLink& link = net_.links[id];
      if (!link.transport_cost[r].available()) continue;
      if (within(at(link.from, r) + link.transport_cost[r].value(), best, tol)) {
        return true;
      }
    }
    return false;
  }

  // Assigns edge decisions for resource r outward from Make/Provider roots in
  // (cost, id) order, so each agent buys from an origin already settled. This
  // keeps the decision graph acyclic even across zero-cost edge cycles.
  void settle_edges(PriceState& state, ResourceIndex r,
                    const std::vector<char>& needs_edge) const {
    const double tol = opts_.tie_tolerance;
    using Key = std::pair<double, AgentId>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
    std::vector<char> done(N_, 0);
    for (std::size_t n = 0; n < N_; ++n) {
      const SourceKind k = state.decision(n, r).kind;
      if (k == SourceKind::Make || k == SourceKind::Provider) {
        heap.emplace(at(n, r), static_cast<AgentId>(n));
      }
    }
    auto tied_edge = [&](const InfraLink& link) {
      const Cost& tc = link.transport_cost[r];
      return tc.available() &&
             within(at(link.from, r) + tc.value(), at(link.to, r), tol);
    };
    while (!heap.empty()) {
      const AgentId u = heap.top().second;
      heap.pop();
      if (done[u]) continue;
      if (needs_edge[u * R_ + r]) {
        bool found = false;
        for (LinkId id : index_.incoming[u]) {
          const InfraLink& link = net_.links[id];
          if (done[link.from] && tied_edge(link)) {
            state.decision(u, r) = {SourceKind::Edge, id,
                                    wrap(at(link.from, r) +
                                         link.transport_cost[r].value())};
            found = true;
            break;
          }
        }
        if (!found) continue;
      }
      done[u] = 1;
      for (LinkId id : index_.outgoing[u]) {
        const InfraLink& link = net_.links[id];
        if (!done[link.to] && needs_edge[link.to * R_ + r] && tied_edge(link)) {
          heap.emplace(at(link.to, r), link.to);
        }
      }
    }
    // Anything left was not reachable through exact ties (rounding); fall
    // back to the cheapest incoming edge.
    for (std::size_t n = 0; n < N_; ++n) {
      if (!needs_edge[n * R_ + r] || done[n]) continue;
      SourceDecision best;
      double best_cost = kInf;
      for (LinkId id : index_.incoming[n]) {
        const InfraLink& link = net_.links[id];
        if (!link.transport_cost[r].available()) continue;
        const double via = at(link.from, r) + link.transport_cost[r].value();
        if (via < best_cost) {
          best_cost = via;
          best = {SourceKind::Edge, id, wrap(via)};
        }
      }
      state.decision(n, r) = best;
    }
  }

  const Network& net_;
  const PricingOptions& opts_;
  LinkIndex index_;
  std::size_t R_;
  std::size_t N_;
  std::vector<double> sell_;
  std::vector<Recipe> recipes_;
  std::vector<double> scratch_a_;
  std::vector<double> scratch_c_;
};

}  // namespace

PriceState empty_prices(const Network& net) {
  PriceState state;
  state.sell_cost = Grid<Cost>(net.agent_count(), net.resource_count());
  state.decision = Grid<SourceDecision>(net.agent_count(), net.resource_count());
  return state;
}

SourceDecision acquire_cost(const Network& net, const LinkIndex& index,
                            const PriceState& prices, AgentId n,
                            ResourceIndex r, double tie_tolerance) {
  const Agent& agent = net.agents.at(n);
  double best = raw(agent.provider_costs[r]);
  for (LinkId id : index.incoming[n]) {
    const InfraLink& link = net.links[id];
    const Cost via = prices.sell_cost(link.from, r) + link.transport_cost[r];
    best = std::min(best, raw(via));
  }
  if (!std::isfinite(best)) return {};
  if (agent.provider_costs[r].available() &&
      within(agent.provider_costs[r].value(), best, tie_tolerance)) {
    return {SourceKind::Provider, -1, agent.provider_costs[r]};
  }
  for (LinkId id : index.incoming[n]) {
    const InfraLink& link = net.links[id];
    const Cost via = prices.sell_cost(link.from, r) + link.transport_cost[r];
    if (via.available() && within(via.value(), best, tie_tolerance)) {
      return {SourceKind::Edge, id, via};
    }
  }
  return {};
}

SourceDecision acquire_cost(const Network& net, const PriceState& prices,
                            AgentId n, ResourceIndex r) {
  return acquire_cost(net, LinkIndex::build(net), prices, n, r);
}

Cost make_cost(const Agent& agent, std::span<const Cost> input_costs,
               ResourceIndex r) {
  if (agent.tech.column_is_zero(r)) {
    throw NotProducible("agent " + agent.label + " cannot produce resource " +
                        std::to_string(r));
  }
  double total = 0.0;
  for (ResourceIndex i = 0; i < agent.tech.size(); ++i) {
    const double a = agent.tech(i, r);
    if (a <= 0.0) continue;
    if (!input_costs[i].available()) return Cost::unavailable();
    total += a * input_costs[i].value();
  }
  return Cost{total};
}

PriceState price_fixed_point(const Network& net, const PricingOptions& opts) {
  return Pricer(net, opts).run();
}

Cost decision_cost(const Network& net, const PriceState& prices, AgentId n,
                   ResourceIndex r) {
  const SourceDecision& d = prices.decision(n, r);
  switch (d.kind) {
    case SourceKind::None:
      return Cost::unavailable();
    case SourceKind::Make:
      return make_cost(net.agents[n], prices.sell_cost.row(n), r);
    case SourceKind::Provider:
      return net.agents[n].provider_costs[r];
    case SourceKind::Edge: {
      const InfraLink& link = net.links[d.link];
      return prices.sell_cost(link.from, r) + link.transport_cost[r];
    }
  }
  return Cost::unavailable();
}

}  // namespace sosim
