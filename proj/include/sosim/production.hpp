#pragma once

#include <memory>
#include <span>
#include <vector>

#include "sosim/core.hpp"

namespace sosim {

struct ProductivityOptions {
  double margin = 1e-6;
  double divergence_bound = 1e12;  // Neumann fallback only
};

struct ProductivityResult {
  bool productive = true;
  double radius = 0.0;
  /// True when the eigenvalue solver failed and the Neumann series test
  /// decided the outcome.
  bool used_fallback = false;
};

ProductivityResult productivity_check(const TechnologyMatrix& A,
                                      const ResourceSet& restricted_to,
                                      const ProductivityOptions& opts = {});

struct ProductionPlan {
  std::vector<double> gross_output;       // X, zero off the made set
  std::vector<double> external_demand;    // D
  std::vector<double> input_requirement;  // S = A X, all rows

  bool operator==(const ProductionPlan&) const = default;
};

ProductionPlan zero_plan(std::size_t resources);

/// Factorised (I - A_MM) for repeated solves with the same agent and made set.
class LeontiefSystem {
 public:
  LeontiefSystem(const TechnologyMatrix& A, ResourceSet made,
                 const ProductivityOptions& opts = {});
  ~LeontiefSystem();
  LeontiefSystem(LeontiefSystem&&) noexcept;
  LeontiefSystem& operator=(LeontiefSystem&&) noexcept;

  const ResourceSet& made() const { return made_; }
  double radius() const { return radius_; }

  /// Full-length demand in, full-length plan out.
  ProductionPlan solve(std::span<const double> demand) const;

 private:
  struct Impl;
  TechnologyMatrix tech_;
  ResourceSet made_;
  double radius_ = 0.0;
  std::unique_ptr<Impl> impl_;
};

ProductionPlan leontief_solve(const TechnologyMatrix& A,
                              std::span<const double> demand,
                              const ResourceSet& made,
                              const ProductivityOptions& opts = {});

struct RequirementSplit {
  std::vector<double> self_supply;
  std::vector<double> imports;
};

RequirementSplit split_requirements(const ProductionPlan& plan,
                                    const ResourceSet& made);

}  // namespace sosim
