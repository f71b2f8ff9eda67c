#include "sosim/production.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sosim/errors.hpp"

namespace sosim {

namespace {

Eigen::MatrixXd submatrix(const TechnologyMatrix& A, const ResourceSet& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out(i, j) = A(idx[i], idx[j]);
    }
  }
  return out;
}

// Irreducible diagonal blocks (strongly connected components of the
// nonzero pattern). rho(A) is the largest block radius, and a block of one
// resource without a self-input contributes exactly zero.
std::vector<std::vector<Eigen::Index>> irreducible_blocks(const Eigen::MatrixXd& A) {
  const Eigen::Index m = A.rows();
  std::vector<int> index(m, -1), low(m, 0);
  std::vector<char> on(m, 0);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> blocks;
  int counter = 0;
  // recursion depth is bounded by the resource count
  auto visit = [&](auto&& self, Eigen::Index v) -> void {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (Eigen::Index w = 0; w < m; ++w) {
      if (A(v, w) == 0.0) continue;
      if (index[w] < 0) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<Eigen::Index> block;
      Eigen::Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        block.push_back(w);
      } while (w != v);
      blocks.push_back(std::move(block));
    }
  };
  for (Eigen::Index v = 0; v < m; ++v) {
    if (index[v] < 0) visit(visit, v);
  }
  return blocks;
}

bool block_radius(const Eigen::MatrixXd& A, double& radius) {
  radius = 0.0;
  for (const auto& block : irreducible_blocks(A)) {
    const auto k = static_cast<Eigen::Index>(block.size());
    if (k == 1) {
      radius = std::max(radius, std::abs(A(block[0], block[0])));
      continue;
    }
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = A(block[i], block[j]);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(sub, false);
    if (solver.info() != Eigen::Success) return false;
    radius = std::max(radius, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  return true;
}

// Doubling partial sums S_N = sum_{k<N} A^k. Divergence of S decides
// non-productivity; the Gelfand formula gives the radius estimate.
ProductivityResult neumann_fallback(const Eigen::MatrixXd& A,
                                    const ProductivityOptions& opts) {
  const Eigen::Index m = A.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd P = A;
  double power = 1.0;
  double radius = 0.0;
  bool diverged = false;
  bool settled = false;
  for (int k = 0; k < 48; ++k) {
    const double norm = P.cwiseAbs().rowwise().sum().maxCoeff();
    if (norm > 1e-300 && norm < 1e300) radius = std::pow(norm, 1.0 / power);
    if (norm < 1e-18) {
      settled = true;
      break;
    }
    S += P * S;
    if (!(S.cwiseAbs().maxCoeff() <= opts.divergence_bound)) {
      diverged = true;
      break;
    }
    P = P * P;
    power *= 2.0;
  }
  ProductivityResult out;
  out.used_fallback = true;
  out.radius = radius;
  out.productive = !diverged && settled && radius < 1.0 - opts.margin;
  if (!diverged && !settled) out.radius = std::max(radius, 1.0);
  return out;
}

std::string describe(const ResourceSet& made) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < made.size(); ++i) out << (i ? "," : "") << made[i];
  out << '}';
  return out.str();
}

}  // namespace

ProductivityResult productivity_check(const TechnologyMatrix& A,
                                      const ResourceSet& restricted_to,
                                      const ProductivityOptions& opts) {
  ProductivityResult out;
  if (restricted_to.empty()) return out;
  const Eigen::MatrixXd sub = submatrix(A, restricted_to);
  if (sub.isZero(0.0)) return out;

  double radius = 0.0;
  if (block_radius(sub, radius)) {
    out.radius = std::max(radius, 0.0);
    out.productive = out.radius < 1.0 - opts.margin;
    return out;
  }
  return neumann_fallback(sub, opts);
}

ProductionPlan zero_plan(std::size_t resources) {
  ProductionPlan plan;
  plan.gross_output.assign(resources, 0.0);
  plan.external_demand.assign(resources, 0.0);
  plan.input_requirement.assign(resources, 0.0);
  return plan;
}

struct LeontiefSystem::Impl {
  Eigen::MatrixXd system;  // I - A_MM
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

LeontiefSystem::LeontiefSystem(const TechnologyMatrix& A, ResourceSet made,
                               const ProductivityOptions& opts)
    : tech_(A), made_(std::move(made)), impl_(std::make_unique<Impl>()) {
  const auto check = productivity_check(tech_, made_, opts);
  radius_ = check.radius;
  if (!check.productive) {
    std::ostringstream msg;
    msg << "technology matrix is not productive on made set "
        << describe(made_) << " (spectral radius " << check.radius << ")";
    throw NotProductive(msg.str());
  }
  const auto m = static_cast<Eigen::Index>(made_.size());
  impl_->system = Eigen::MatrixXd::Identity(m, m) - submatrix(tech_, made_);
  if (m > 0) impl_->lu.compute(impl_->system);
}

LeontiefSystem::~LeontiefSystem() = default;
LeontiefSystem::LeontiefSystem(LeontiefSystem&&) noexcept = default;
LeontiefSystem& LeontiefSystem::operator=(LeontiefSystem&&) noexcept = default;

ProductionPlan LeontiefSystem::solve(std::span<const double> demand) const {
  const std::size_t R = tech_.size();
  ProductionPlan plan = zero_plan(R);
  const auto m = static_cast<Eigen::Index>(made_.size());
  for (std::size_t k = 0; k < made_.size(); ++k) {
    plan.external_demand[made_[k]] = demand[made_[k]];
  }
  if (m == 0) return plan;

  Eigen::VectorXd d(m);
  for (Eigen::Index k = 0; k < m; ++k) d(k) = demand[made_[k]];
  Eigen::VectorXd x = impl_->lu.solve(d);
  // One step of iterative refinement keeps the residual near machine level.
  Eigen::VectorXd r = d - impl_->system * x;
  x += impl_->lu.solve(r);

  for (Eigen::Index k = 0; k < m; ++k) {
    plan.gross_output[made_[k]] = std::max(0.0, x(k));
  }
  for (std::size_t i = 0; i < R; ++i) {
    double s = 0.0;
    for (ResourceIndex j : made_) s += tech_(i, j) * plan.gross_output[j];
    plan.input_requirement[i] = s;
  }
  return plan;
}

ProductionPlan leontief_solve(const TechnologyMatrix& A,
                              std::span<const double> demand,
                              const ResourceSet& made,
                              const ProductivityOptions& opts) {
  if (demand.size() != A.size()) {
    throw std::invalid_argument("demand length does not match matrix size");
  }
  std::vector<bool> in_made(A.size(), false);
  for (ResourceIndex r : made) in_made.at(r) = true;
  for (std::size_t r = 0; r < demand.size(); ++r) {
    if (!(demand[r] >= 0.0) || !std::isfinite(demand[r])) {
      throw std::invalid_argument("demand must be finite and nonnegative");
    }
    if (!in_made[r] && demand[r] != 0.0) {
      throw std::invalid_argument("demand placed on a resource outside the made set");
    }
  }
  return LeontiefSystem(A, made, opts).solve(demand);
}

RequirementSplit split_requirements(const ProductionPlan& plan,
                                    const ResourceSet& made) {
  const std::size_t R = plan.input_requirement.size();
  RequirementSplit out{std::vector<double>(R, 0.0), std::vector<double>(R, 0.0)};
  std::vector<bool> in_made(R, false);
  for (ResourceIndex r : made) in_made.at(r) = true;
  for (std::size_t i = 0; i < R; ++i) {
    (in_made[i] ? out.self_supply : out.imports)[i] = plan.input_requirement[i];
  }
  return out;
}

}  // namespace sosim
