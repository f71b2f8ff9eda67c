#include "sosim/core.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "sosim/errors.hpp"

namespace sosim {

ResourceCatalog::ResourceCatalog(std::vector<std::string> names)
    : names_(std::move(names)) {
  for (ResourceIndex r = 0; r < names_.size(); ++r) {
    lookup_.emplace(names_[r], r);
  }
}

std::optional<ResourceIndex> ResourceCatalog::index_of(
    std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

TechnologyMatrix::TechnologyMatrix(std::size_t resources,
                                   std::vector<double> row_major)
    : size_(resources), entries_(std::move(row_major)) {
  if (entries_.size() != resources * resources) {
    throw std::invalid_argument("technology matrix needs R*R entries");
  }
}

bool TechnologyMatrix::column_is_zero(ResourceIndex output) const {
  for (ResourceIndex i = 0; i < size_; ++i) {
    if ((*this)(i, output) > 0.0) return false;
  }
  return true;
}

bool Agent::is_consumer() const {
  for (double d : final_demand) {
    if (d > 0.0) return true;
  }
  return false;
}

LinkIndex LinkIndex::build(const Network& net) {
  LinkIndex index;
  index.incoming.resize(net.agents.size());
  index.outgoing.resize(net.agents.size());
  for (const auto& link : net.links) {
    index.outgoing.at(link.from).push_back(link.id);
    index.incoming.at(link.to).push_back(link.id);
  }
  return index;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.location << ": " << v.message << '\n';
  }
  return out.str();
}

namespace {

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

class Reporter {
 public:
  explicit Reporter(ValidationReport& report) : report_(report) {}
  void add(std::string location, std::string message) {
    report_.violations.push_back({std::move(location), std::move(message)});
  }

 private:
  ValidationReport& report_;
};

void check_agent(const Agent& agent, std::size_t index, std::size_t R,
                 Reporter& out) {
  const std::string where = "agent " + std::to_string(index);
  if (agent.id != static_cast<AgentId>(index)) {
    out.add(where, "id " + std::to_string(agent.id) + " is not dense");
  }
  if (agent.tech.size() != R) {
    out.add(where, "technology matrix size mismatch");
  } else {
    for (double v : agent.tech.row_major()) {
      if (!finite_nonnegative(v)) {
        out.add(where, "negative or non-finite technical coefficient");
        break;
      }
    }
  }
  if (agent.provider_costs.size() != R) {
    out.add(where, "provider cost vector length mismatch");
  } else {
    for (const Cost& c : agent.provider_costs) {
      if (c.available() && !finite_nonnegative(c.value())) {
        out.add(where, "negative or non-finite provider cost");
        break;
      }
    }
  }
  if (agent.final_demand.size() != R) {
    out.add(where, "final demand vector length mismatch");
  } else {
    for (double d : agent.final_demand) {
      if (!finite_nonnegative(d)) {
        out.add(where, "negative or non-finite final demand");
        break;
      }
    }
  }
}

void check_link(const InfraLink& link, std::size_t index, std::size_t R,
                std::size_t agents, Reporter& out) {
  const std::string where = "link " + std::to_string(index);
  if (link.id != static_cast<LinkId>(index)) {
    out.add(where, "id " + std::to_string(link.id) + " is not dense");
  }
  auto exists = [agents](AgentId a) {
    return a >= 0 && static_cast<std::size_t>(a) < agents;
  };
  if (!exists(link.from) || !exists(link.to)) {
    out.add(where, "dangling endpoint");
  } else if (link.from == link.to) {
    out.add(where, "self loop");
  }
  if (link.transport_cost.size() != R) {
    out.add(where, "transport cost vector length mismatch");
  } else {
    for (const Cost& c : link.transport_cost) {
      if (!c.available()) continue;
      if (!std::isfinite(c.value())) {
        out.add(where, "non-finite cost");
        break;
      }
      if (c.value() < 0.0) {
        out.add(where, "negative cost");
        break;
      }
    }
  }
  if (link.capacity.size() != R) {
    out.add(where, "capacity vector length mismatch");
  } else {
    for (const Capacity& c : link.capacity) {
      if (c.bounded() && !finite_nonnegative(c.limit())) {
        out.add(where, "negative or non-finite capacity");
        break;
      }
    }
  }
}

}  // namespace

ValidationReport validate_network(const Network& net) {
  ValidationReport report;
  Reporter out(report);
  const std::size_t R = net.resource_count();

  if (R == 0) out.add("catalog", "no resources");
  std::unordered_set<std::string> seen;
  for (const auto& name : net.catalog.names()) {
    if (name.empty()) out.add("catalog", "empty resource name");
    if (!seen.insert(name).second) {
      out.add("catalog", "duplicate resource name '" + name + "'");
    }
  }
  if (net.agents.empty()) out.add("network", "no agents");

  for (std::size_t i = 0; i < net.agents.size(); ++i) {
    check_agent(net.agents[i], i, R, out);
  }
  for (std::size_t i = 0; i < net.links.size(); ++i) {
    check_link(net.links[i], i, R, net.agents.size(), out);
  }
  return report;
}

void require_valid(const Network& net) {
  auto report = validate_network(net);
  if (!report.ok()) throw ValidationError(report.to_string());
}

ResourceSet producible_set(const Agent& agent) {
  ResourceSet out;
  for (ResourceIndex r = 0; r < agent.tech.size(); ++r) {
    if (!agent.tech.column_is_zero(r)) out.push_back(r);
  }
  return out;
}

Grid<double> final_demands(const Network& net) {
  Grid<double> demand(net.agents.size(), net.resource_count(), 0.0);
  for (const auto& agent : net.agents) {
    for (ResourceIndex r = 0; r < agent.final_demand.size(); ++r) {
      demand(agent.id, r) = agent.final_demand[r];
    }
  }
  return demand;
}

Agent make_agent(AgentId id, std::string label, std::size_t resources) {
  Agent agent;
  agent.id = id;
  agent.label = std::move(label);
  agent.tech = TechnologyMatrix(resources);
  agent.provider_costs.assign(resources, Cost::unavailable());
  agent.final_demand.assign(resources, 0.0);
  return agent;
}

InfraLink make_link(LinkId id, AgentId from, AgentId to, std::size_t resources,
                    double unit_cost, int priority) {
  InfraLink link;
  link.id = id;
  link.from = from;
  link.to = to;
  link.transport_cost.assign(resources, Cost{unit_cost});
  link.capacity.assign(resources, Capacity::unbounded());
  link.priority = priority;
  return link;
}

}  // namespace sosim
