#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

std::vector<double> neumann_output(const TechnologyMatrix& A, const std::vector<double>& demand,
                                   const ResourceSet& made) {
  const std::size_t R = A.size();
  std::vector<double> x(R, 0.0), term(R, 0.0), next(R, 0.0);
  for (auto m : made) term[m] = demand[m];
  for (int k = 0; k < 2000000; ++k) {
    double size = 0.0, total = 0.0;
    for (auto m : made) {
      x[m] += term[m];
      size = std::max(size, std::abs(term[m]));
      total = std::max(total, std::abs(x[m]));
    }
    if (size <= 1e-18 * (1.0 + total)) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (auto i : made) {
      for (auto j : made) next[i] += A(i, j) * term[j];
    }
    std::swap(term, next);
  }
  return x;
}

double power_radius(const TechnologyMatrix& A, const ResourceSet& made, int iterations) {
  const std::size_t M = made.size();
  if (M == 0) return 0.0;
  std::vector<double> v(M, 1.0 / static_cast<double>(M)), w(M);
  double ratio = 1.0;
  for (int it = 0; it < iterations; ++it) {
    double norm = 0.0;
    for (std::size_t a = 0; a < M; ++a) {
      w[a] = v[a];
      for (std::size_t b = 0; b < M; ++b) w[a] += A(made[a], made[b]) * v[b];
      norm += w[a];
    }
    ratio = norm;  // |v|_1 == 1
    for (std::size_t a = 0; a < M; ++a) v[a] = w[a] / norm;
  }
  return ratio - 1.0;
}

TechnologyMatrix random_productive(sosim::Rng& rng, std::size_t R, const ResourceSet& made,
                                   double radius) {
  TechnologyMatrix A(R);
  for (auto j : made) {
    for (std::size_t i = 0; i < R; ++i) {
      A(i, j) = rng.bernoulli(0.7) ? rng.uniform(0.0, 1.0) : 0.0;
    }
    A(rng.next() % R, j) += 0.1;  // keep the column nonzero
  }
  const double rho = power_radius(A, made, 5000);
  if (rho > 0.0) {
    for (auto j : made) {
      for (std::size_t i = 0; i < R; ++i) A(i, j) *= radius / rho;
    }
  }
  return A;
}

namespace {

struct Option {
  enum Kind { Make, Provider, Edge } kind;
  int link = -1;
};

// Pairs that can ever receive a finite price when iteration starts from
// "nothing is priced": a provider, an edge from a grounded pair, or a make
// whose inputs are all grounded.
std::vector<char> grounded(const Network& net) {
  const std::size_t N = net.agent_count(), R = net.resource_count();
  std::vector<char> g(N * R, 0);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t n = 0; n < N; ++n) {
      const auto& a = net.agents[n];
      for (std::size_t r = 0; r < R; ++r) {
        if (g[n * R + r]) continue;
        bool ok = a.provider_costs[r].available();
        for (const auto& l : net.links) {
          ok = ok || (static_cast<std::size_t>(l.to) == n && l.transport_cost[r].available() &&
                      g[static_cast<std::size_t>(l.from) * R + r]);
        }
        bool makes = false, inputs = true;
        for (std::size_t i = 0; i < R; ++i) {
          if (a.tech(i, r) > 0.0) {
            makes = true;
            inputs = inputs && g[n * R + i];
          }
        }
        ok = ok || (makes && inputs);
        if (ok) {
          g[n * R + r] = 1;
          grew = true;
        }
      }
    }
  }
  return g;
}

std::vector<std::vector<Option>> options_of(const Network& net) {
  const std::size_t N = net.agent_count(), R = net.resource_count();
  const auto g = grounded(net);
  std::vector<std::vector<Option>> out(N * R);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t r = 0; r < R; ++r) {
      if (!g[n * R + r]) continue;  // stays unpriced
      auto& opts = out[n * R + r];
      const auto& a = net.agents[n];
      bool makes = false, inputs = true;
      for (std::size_t i = 0; i < R; ++i) {
        if (a.tech(i, r) > 0.0) {
          makes = true;
          inputs = inputs && g[n * R + i];
        }
      }
      if (makes && inputs) opts.push_back({Option::Make});
      if (a.provider_costs[r].available()) opts.push_back({Option::Provider});
      for (const auto& l : net.links) {
        if (static_cast<std::size_t>(l.to) == n && l.transport_cost[r].available() &&
            g[static_cast<std::size_t>(l.from) * R + r]) {
          opts.push_back({Option::Edge, l.id});
        }
      }
    }
  }
  return out;
}

// Gaussian elimination with partial pivoting; false when singular.
bool solve_dense(std::vector<std::vector<double>> M, std::vector<double> b,
                 std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(M[r][c]) > std::abs(M[p][c])) p = r;
    }
    if (std::abs(M[p][c]) < 1e-13) return false;
    std::swap(M[p], M[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = M[r][c] / M[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= M[i][k] * x[k];
    x[i] = s / M[i][i];
  }
  return true;
}

// Costs induced by one assignment. Each strongly connected block of the
// dependency graph is either solved exactly or, when it has no finite
// solution with a nonnegative inverse, marked infinite along with everything
// that depends on it.
void assignment_costs(const Network& net, const std::vector<const Option*>& pick,
                      std::vector<double>& cost) {
  const std::size_t N = net.agent_count(), R = net.resource_count(), P = N * R;
  // dependency edges: pair -> (pair it reads, coefficient)
  std::vector<std::vector<std::pair<std::size_t, double>>> dep(P);
  std::vector<double> base(P, 0.0);
  std::vector<char> none(P, 0);
  for (std::size_t p = 0; p < P; ++p) {
    const std::size_t n = p / R, r = p % R;
    const Option* o = pick[p];
    if (!o) {
      none[p] = 1;
      continue;
    }
    if (o->kind == Option::Provider) {
      base[p] = net.agents[n].provider_costs[r].value();
    } else if (o->kind == Option::Edge) {
      const auto& l = net.links[o->link];
      base[p] = l.transport_cost[r].value();
      dep[p].push_back({static_cast<std::size_t>(l.from) * R + r, 1.0});
    } else {
      for (std::size_t i = 0; i < R; ++i) {
        const double a = net.agents[n].tech(i, r);
        if (a > 0.0) dep[p].push_back({n * R + i, a});
      }
    }
  }

  // Tarjan, recursive (P <= 12).
  std::vector<int> index(P, -1), low(P, 0), comp(P, -1);
  std::vector<char> on(P, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;  // dependencies before dependents
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (auto [w, _] : dep[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> c;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        comp[w] = static_cast<int>(comps.size());
        c.push_back(w);
      } while (w != v);
      comps.push_back(std::move(c));
    }
  };
  for (std::size_t p = 0; p < P; ++p) {
    if (index[p] < 0) visit(p);
  }

  cost.assign(P, kInf);
  for (const auto& c : comps) {
    const int id = comp[c.front()];
    bool dead = false;
    const std::size_t m = c.size();
    std::vector<std::vector<double>> M(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t p = c[a];
      if (none[p]) dead = true;
      M[a][a] += 1.0;
      rhs[a] = base[p];
      for (auto [q, coef] : dep[p]) {
        if (comp[q] == id) {
          const auto b = static_cast<std::size_t>(std::find(c.begin(), c.end(), q) - c.begin());
          M[a][b] -= coef;
        } else if (std::isinf(cost[q])) {
          dead = true;
        } else {
          rhs[a] += coef * cost[q];
        }
      }
    }
    if (dead) continue;
    // Finite least solution needs (I - M) to be a nonsingular M-matrix:
    // check through its inverse, column by column.
    bool ok = true;
    for (std::size_t k = 0; k < m && ok; ++k) {
      std::vector<double> e(m, 0.0), col;
      e[k] = 1.0;
      ok = solve_dense(M, e, col) &&
           std::all_of(col.begin(), col.end(), [](double v) { return v >= -1e-12; });
    }
    if (!ok) continue;
    std::vector<double> x;
    if (!solve_dense(M, rhs, x)) continue;
    for (std::size_t a = 0; a < m; ++a) cost[c[a]] = std::max(0.0, x[a]);
  }
}

}  // namespace

std::uint64_t assignment_count(const Network& net) {
  std::uint64_t total = 1;
  for (const auto& o : options_of(net)) {
    total *= std::max<std::uint64_t>(1, o.size());
    if (total > (1ULL << 40)) break;
  }
  return total;
}

Enumeration enumerate_costs(const Network& net, const Grid<double>& demands) {
  const std::size_t N = net.agent_count(), R = net.resource_count(), P = N * R;
  const auto opts = options_of(net);
  Enumeration out;
  out.pair_cost = Grid<double>(N, R, kInf);
  std::vector<std::size_t> digit(P, 0);
  std::vector<const Option*> pick(P, nullptr);
  std::vector<double> cost;
  for (;;) {
    for (std::size_t p = 0; p < P; ++p) pick[p] = opts[p].empty() ? nullptr : &opts[p][digit[p]];
    assignment_costs(net, pick, cost);
    ++out.assignments;
    double total = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      out.pair_cost(p / R, p % R) = std::min(out.pair_cost(p / R, p % R), cost[p]);
      const double d = demands(p / R, p % R);
      if (d > 0.0) total += d * cost[p];
    }
    out.total = std::min(out.total, total);
    // odometer
    std::size_t p = 0;
    while (p < P) {
      if (++digit[p] < std::max<std::size_t>(1, opts[p].size())) break;
      digit[p] = 0;
      ++p;
    }
    if (p == P) break;
  }
  return out;
}

Grid<double> brute_prices(const Network& net, int sweeps) {
  const std::size_t N = net.agent_count(), R = net.resource_count();
  Grid<double> c(N, R, kInf);
  for (int k = 0; k < sweeps; ++k) {
    Grid<double> next(N, R, kInf);
    for (std::size_t n = 0; n < N; ++n) {
      const auto& a = net.agents[n];
      for (std::size_t r = 0; r < R; ++r) {
        double best = a.provider_costs[r].available() ? a.provider_costs[r].value() : kInf;
        for (const auto& l : net.links) {
          if (static_cast<std::size_t>(l.to) == n && l.transport_cost[r].available()) {
            best = std::min(best, c(l.from, r) + l.transport_cost[r].value());
          }
        }
        bool makes = false;
        double make = 0.0;
        for (std::size_t i = 0; i < R; ++i) {
          if (a.tech(i, r) > 0.0) {
            makes = true;
            make += a.tech(i, r) * c(n, i);
          }
        }
        if (makes) best = std::min(best, make);
        next(n, r) = best;
      }
    }
    c = std::move(next);
  }
  return c;
}

Network small_random_net(sosim::Rng& rng) {
  const std::size_t N = 2 + rng.next() % 3;
  const std::size_t R = 1 + rng.next() % 3;
  Network net;
  std::vector<std::string> names;
  for (std::size_t r = 0; r < R; ++r) names.push_back("R" + std::to_string(r + 1));
  net.catalog = sosim::ResourceCatalog(names);
  for (std::size_t n = 0; n < N; ++n) {
    auto a = sosim::make_agent(static_cast<int>(n), "A" + std::to_string(n + 1), R);
    if (n == 0 || rng.bernoulli(0.4)) {
      for (std::size_t r = 0; r < R; ++r) {
        if (rng.bernoulli(0.6)) a.provider_costs[r] = sosim::Cost{rng.uniform(0.5, 5.0)};
      }
    }
    if (rng.bernoulli(0.5)) {
      ResourceSet made;
      for (std::size_t r = 0; r < R; ++r) {
        if (rng.bernoulli(0.5)) made.push_back(r);
      }
      if (!made.empty()) a.tech = random_productive(rng, R, made, rng.uniform(0.1, 0.8));
    }
    net.agents.push_back(std::move(a));
  }
  const std::size_t L = 1 + rng.next() % 5;
  for (std::size_t k = 0; k < L; ++k) {
    const int from = static_cast<int>(rng.next() % N);
    int to = static_cast<int>(rng.next() % (N - 1));
    if (to >= from) ++to;
    auto l = sosim::make_link(static_cast<int>(k), from, to, R, 0.0, static_cast<int>(k));
    for (std::size_t r = 0; r < R; ++r) {
      const double u = rng.uniform();
      l.transport_cost[r] = u < 0.1    ? sosim::Cost::unavailable()
                            : u < 0.2  ? sosim::Cost{0.0}
                                       : sosim::Cost{rng.uniform(0.05, 1.0)};
    }
    net.links.push_back(std::move(l));
  }
  return net;
}

}  // namespace oracle
