#pragma once

// Slow, independent reference computations for the tests. None of these
// share code with the library's solvers.

#include <cstdint>
#include <limits>
#include <vector>

#include "sosim/core.hpp"
#include "sosim/disruption.hpp"

namespace oracle {

using sosim::Grid;
using sosim::Network;
using sosim::ResourceSet;
using sosim::TechnologyMatrix;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// X = sum_k A_MM^k D_M, summed until the terms vanish.
std::vector<double> neumann_output(const TechnologyMatrix& A, const std::vector<double>& demand,
                                   const ResourceSet& made);

/// Dominant eigenvalue of A_MM by power iteration on A_MM + I.
double power_radius(const TechnologyMatrix& A, const ResourceSet& made, int iterations = 20000);

/// Random nonnegative matrix rescaled to the given spectral radius on `made`.
TechnologyMatrix random_productive(sosim::Rng& rng, std::size_t R, const ResourceSet& made,
                                   double radius);

struct Enumeration {
  Grid<double> pair_cost;  // cheapest over all assignments, kInf if none
  double total = kInf;     // cheapest sum of demand x cost, kInf if infeasible
  std::uint64_t assignments = 0;
};

/// Number of complete source assignments (make / provider / each priced
/// incoming edge, per agent and resource).
std::uint64_t assignment_count(const Network& net);

/// Tries every assignment over the pairs that can be priced at all, solving
/// the linear cost system each one induces.
Enumeration enumerate_costs(const Network& net, const Grid<double>& demands);

/// Plain synchronous value iteration from "nothing priced", `sweeps` times.
Grid<double> brute_prices(const Network& net, int sweeps);

/// Up to 4 agents, 5 links, 3 resources, no capacities, no demand.
Network small_random_net(sosim::Rng& rng);

}  // namespace oracle
