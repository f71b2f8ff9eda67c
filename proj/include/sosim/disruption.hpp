#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sosim/core.hpp"

namespace sosim {

// An empty resource set on the link/demand kinds means "every resource".

struct LinkBreak {
  LinkId link = 0;
  bool operator==(const LinkBreak&) const = default;
};
struct LinkCostScale {
  LinkId link = 0;
  ResourceSet resources;
  double factor = 1.0;
  bool operator==(const LinkCostScale&) const = default;
};
struct LinkCapacityScale {
  LinkId link = 0;
  ResourceSet resources;
  double factor = 1.0;
  bool operator==(const LinkCapacityScale&) const = default;
};
struct MatrixCellScale {
  AgentId agent = 0;
  ResourceIndex row = 0;
  ResourceIndex col = 0;
  double factor = 1.0;
  bool operator==(const MatrixCellScale&) const = default;
};
struct MatrixRowScale {
  AgentId agent = 0;
  ResourceIndex row = 0;
  double factor = 1.0;
  bool operator==(const MatrixRowScale&) const = default;
};
struct MatrixColumnScale {
  AgentId agent = 0;
  ResourceIndex col = 0;
  double factor = 1.0;
  bool operator==(const MatrixColumnScale&) const = default;
};
struct DemandScale {
  AgentId agent = 0;
  ResourceSet resources;
  double factor = 1.0;
  bool operator==(const DemandScale&) const = default;
};

using EventKind = std::variant<LinkBreak, LinkCostScale, LinkCapacityScale,
                               MatrixCellScale, MatrixRowScale,
                               MatrixColumnScale, DemandScale>;

struct DisruptionEvent {
  EventKind kind;
  std::optional<int> duration;  // timesteps; nullopt is permanent

  bool permanent() const { return !duration.has_value(); }
  bool operator==(const DisruptionEvent&) const = default;
};

std::string describe(const DisruptionEvent& e);

/// Throws UnresolvedTarget for ids outside `net`, ValidationError for bad factors.
void check_event(const Network& net, const DisruptionEvent& e);

Network apply_event(const Network& net, const DisruptionEvent& e);

/// Restores the fields `e` targets from `baseline`.
Network revert_event(const Network& net, const Network& baseline,
                     const DisruptionEvent& e);

// ---------------------------------------------------------------------------
// Stochastic generators

enum class EventType {
  LinkBreak,
  LinkCostScale,
  LinkCapacityScale,
  MatrixCellScale,
  MatrixRowScale,
  MatrixColumnScale,
  DemandScale,
};

const char* to_string(EventType t);
std::optional<EventType> event_type_from(std::string_view name);

/// Everything about a generated event except target, magnitude and duration.
struct EventTemplate {
  EventType type = EventType::LinkBreak;
  ResourceSet resources;
  ResourceIndex row = 0;
  ResourceIndex col = 0;

  bool operator==(const EventTemplate&) const = default;
};

struct FixedDuration {
  int steps = 1;
  bool operator==(const FixedDuration&) const = default;
};
struct GeometricDuration {
  double p = 0.5;  // per-step recovery probability, duration >= 1
  bool operator==(const GeometricDuration&) const = default;
};
struct PermanentDuration {
  bool operator==(const PermanentDuration&) const = default;
};
using DurationDist = std::variant<FixedDuration, GeometricDuration, PermanentDuration>;

struct Generator {
  std::string name;
  std::vector<int> targets;  // link ids or agent ids depending on the template
  double onset_prob = 0.0;
  double magnitude_lo = 1.0;
  double magnitude_hi = 1.0;
  DurationDist duration = FixedDuration{1};
  std::uint64_t seed = 0;
  EventTemplate kind;

  bool operator==(const Generator&) const = default;
};

inline constexpr const char* kRngName = "mt19937_64";

/// Portable draws on top of mt19937_64 (whose output sequence is fixed by
/// the standard); the std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1), 53 random bits
  bool bernoulli(double p) { return uniform() < p; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int geometric(double p);  // trials until first success, >= 1

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

struct ActiveEvent {
  int target = 0;
  int end = 0;  // first timestep at which the event is no longer active
  DisruptionEvent event;

  bool operator==(const ActiveEvent&) const = default;
};

struct GeneratorState {
  Rng rng;
  std::vector<ActiveEvent> active;

  bool operator==(const GeneratorState&) const = default;
};

GeneratorState initial_state(const Generator& g);

struct GeneratorStep {
  std::vector<DisruptionEvent> started;
  std::vector<DisruptionEvent> ended;
  GeneratorState state;
};

/// Ends expire first, then each free target draws an onset. Deterministic
/// given (g, t, state).
GeneratorStep generator_step(const Generator& g, int t, GeneratorState state);

void check_generator(const Network& net, const Generator& g);

DisruptionEvent make_event(const EventTemplate& tpl, int target,
                           double magnitude, std::optional<int> duration);

}  // namespace sosim
