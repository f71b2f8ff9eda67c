#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sosim {

using AgentId = int;
using LinkId = int;
using ResourceIndex = std::size_t;

/// Sorted, duplicate-free list of resource indices.
using ResourceSet = std::vector<ResourceIndex>;

/// Rank used when an agent's own final demand competes with its outgoing
/// links; the default places it after every link.
inline constexpr int kLastPriority = std::numeric_limits<int>::max();

/// Unit cost of a resource: a finite nonnegative value or Unavailable.
class Cost {
 public:
  constexpr Cost() = default;
  constexpr explicit Cost(double value) : value_(value) {}

  static constexpr Cost unavailable() { return Cost{}; }

  constexpr bool available() const { return value_.has_value(); }
  constexpr double value() const { return *value_; }

  /// Strict "cheaper than" where Unavailable is worse than any value.
  constexpr bool cheaper_than(const Cost& other) const {
    if (!available()) return false;
    if (!other.available()) return true;
    return *value_ < *other.value_;
  }

  friend constexpr Cost operator+(const Cost& c, double delta) {
    return c.available() ? Cost{*c.value_ + delta} : Cost{};
  }
  friend constexpr Cost operator+(const Cost& a, const Cost& b) {
    return a.available() && b.available() ? Cost{*a.value_ + *b.value_}
                                          : Cost{};
  }

  friend constexpr bool operator==(const Cost&, const Cost&) = default;

 private:
  std::optional<double> value_;
};

inline constexpr Cost min_cost(const Cost& a, const Cost& b) {
  return b.cheaper_than(a) ? b : a;
}

/// Per-resource link capacity: a finite nonnegative quantity or Unbounded.
class Capacity {
 public:
  constexpr Capacity() = default;
  constexpr explicit Capacity(double limit) : limit_(limit) {}

  static constexpr Capacity unbounded() { return Capacity{}; }

  constexpr bool bounded() const { return limit_.has_value(); }
  constexpr double limit() const { return *limit_; }
  /// Limit as a plain number, +inf when unbounded. For internal arithmetic.
  constexpr double as_double() const {
    return limit_ ? *limit_ : std::numeric_limits<double>::infinity();
  }

  friend constexpr bool operator==(const Capacity&, const Capacity&) = default;

 private:
  std::optional<double> limit_;
};

/// Dense row-major table, used for every (agent, resource) and
/// (link, resource) quantity.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, const T& init = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, init) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

class ResourceCatalog {
 public:
  ResourceCatalog() = default;
  explicit ResourceCatalog(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(ResourceIndex r) const { return names_.at(r); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<ResourceIndex> index_of(std::string_view name) const;

  bool operator==(const ResourceCatalog& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ResourceIndex> lookup_;
};

/// Technical coefficients: entry (i, j) is the amount of resource i consumed
/// per unit of resource j produced.
class TechnologyMatrix {
 public:
  TechnologyMatrix() = default;
  explicit TechnologyMatrix(std::size_t resources)
      : size_(resources), entries_(resources * resources, 0.0) {}
  TechnologyMatrix(std::size_t resources, std::vector<double> row_major);

  std::size_t size() const { return size_; }

  double operator()(ResourceIndex input, ResourceIndex output) const {
    return entries_[input * size_ + output];
  }
  double& operator()(ResourceIndex input, ResourceIndex output) {
    return entries_[input * size_ + output];
  }

  std::span<const double> row_major() const { return entries_; }

  bool column_is_zero(ResourceIndex output) const;

  bool operator==(const TechnologyMatrix&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<double> entries_;
};

struct Agent {
  AgentId id = 0;
  std::string label;
  TechnologyMatrix tech;
  /// Raw-material interface: present only for resources this agent injects.
  std::vector<Cost> provider_costs;
  std::vector<double> final_demand;
  int final_demand_priority = kLastPriority;

  bool is_consumer() const;
  bool operator==(const Agent&) const = default;
};

struct InfraLink {
  LinkId id = 0;
  AgentId from = 0;
  AgentId to = 0;
  std::vector<Cost> transport_cost;
  std::vector<Capacity> capacity;
  int priority = 0;

  bool operator==(const InfraLink&) const = default;
};

/// Agents and links are stored densely: agents[i].id == i, links[i].id == i.
struct Network {
  ResourceCatalog catalog;
  std::vector<Agent> agents;
  std::vector<InfraLink> links;
  std::string timestep = "15min";

  std::size_t resource_count() const { return catalog.size(); }
  std::size_t agent_count() const { return agents.size(); }
  std::size_t link_count() const { return links.size(); }

  bool operator==(const Network&) const = default;
};

/// Incoming/outgoing link ids per agent, each list in ascending id order.
struct LinkIndex {
  std::vector<std::vector<LinkId>> incoming;
  std::vector<std::vector<LinkId>> outgoing;

  static LinkIndex build(const Network& net);
};

struct Violation {
  std::string location;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_network(const Network& net);

/// Throws ValidationError carrying the report text when `net` is invalid.
void require_valid(const Network& net);

ResourceSet producible_set(const Agent& agent);

/// Final-demand table (agents x resources) taken from the network.
Grid<double> final_demands(const Network& net);

/// Agent with empty matrix, no provider, no demand, sized for `resources`.
Agent make_agent(AgentId id, std::string label, std::size_t resources);

/// Link carrying every resource at `unit_cost` with unbounded capacity.
InfraLink make_link(LinkId id, AgentId from, AgentId to, std::size_t resources,
                    double unit_cost, int priority = 0);

}  // namespace sosim
