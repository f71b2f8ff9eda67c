#include "sosim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sosim/errors.hpp"

namespace sosim {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(where, std::string("missing '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where, "expected an integer");
  return v.get<int>();
}

ResourceIndex resource(const json& v, const Network& net, const std::string& where) {
  if (v.is_string()) {
    const auto idx = net.catalog.index_of(v.get<std::string>());
    if (!idx) bad(where, "unknown resource '" + v.get<std::string>() + "'");
    return *idx;
  }
  if (v.is_number_unsigned()) return v.get<ResourceIndex>();
  bad(where, "resource must be a name or a nonnegative index");
}

ResourceSet resources(const json& obj, const Network& net, const std::string& where) {
  ResourceSet out;
  auto it = obj.find("resources");
  if (it == obj.end()) return out;  // all
  if (!it->is_array()) bad(where, "'resources' must be a list");
  for (const auto& r : *it) out.push_back(resource(r, net, where));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<int> duration(const json& obj, const std::string& where) {
  auto it = obj.find("duration");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string() && it->get<std::string>() == "permanent") return std::nullopt;
  return integer(*it, where + ".duration");
}

EventType type_of(const json& obj, const std::string& where) {
  const json& t = field(obj, "type", where);
  if (!t.is_string()) bad(where, "'type' must be a string");
  const auto type = event_type_from(t.get<std::string>());
  if (!type) bad(where, "unknown event type '" + t.get<std::string>() + "'");
  return *type;
}

TimedEvent read_event(const json& obj, const Network& net, const std::string& where) {
  if (!obj.is_object()) bad(where, "event must be an object");
  TimedEvent te;
  if (auto it = obj.find("start"); it != obj.end()) te.start = integer(*it, where + ".start");
  te.event.duration = duration(obj, where);
  auto factor = [&] { return number(field(obj, "factor", where), where + ".factor"); };
  auto link = [&] { return integer(field(obj, "link", where), where + ".link"); };
  auto agent = [&] { return integer(field(obj, "agent", where), where + ".agent"); };
  auto res = [&](const char* key) {
    return resource(field(obj, key, where), net, where + "." + key);
  };
  switch (type_of(obj, where)) {
    case EventType::LinkBreak:
      te.event.kind = LinkBreak{link()};
      break;
    case EventType::LinkCostScale:
      te.event.kind = LinkCostScale{link(), resources(obj, net, where), factor()};
      break;
    case EventType::LinkCapacityScale:
      te.event.kind = LinkCapacityScale{link(), resources(obj, net, where), factor()};
      break;
    case EventType::MatrixCellScale:
      te.event.kind = MatrixCellScale{agent(), res("row"), res("col"), factor()};
      break;
    case EventType::MatrixRowScale:
      te.event.kind = MatrixRowScale{agent(), res("row"), factor()};
      break;
    case EventType::MatrixColumnScale:
      te.event.kind = MatrixColumnScale{agent(), res("col"), factor()};
      break;
    case EventType::DemandScale:
      te.event.kind = DemandScale{agent(), resources(obj, net, where), factor()};
      break;
  }
  return te;
}

DurationDist read_duration_dist(const json& obj, const std::string& where) {
  auto it = obj.find("duration");
  if (it == obj.end()) return FixedDuration{1};
  if (it->is_number_integer()) return FixedDuration{it->get<int>()};
  if (it->is_string() && it->get<std::string>() == "permanent") return PermanentDuration{};
  if (it->is_object()) {
    const std::string w = where + ".duration";
    const json& kind = field(*it, "kind", w);
    if (kind == "fixed") return FixedDuration{integer(field(*it, "steps", w), w + ".steps")};
    if (kind == "geometric") return GeometricDuration{number(field(*it, "p", w), w + ".p")};
    if (kind == "permanent") return PermanentDuration{};
    bad(w, "unknown duration kind");
  }
  bad(where, "bad 'duration'");
}

Generator read_generator(const json& obj, const Network& net, const std::string& where,
                         std::uint64_t run_seed, std::uint64_t k) {
  if (!obj.is_object()) bad(where, "generator must be an object");
  Generator g;
  g.name = obj.value("name", "gen" + std::to_string(k));
  g.kind.type = type_of(obj, where);
  g.kind.resources = resources(obj, net, where);
  if (auto it = obj.find("row"); it != obj.end()) g.kind.row = resource(*it, net, where + ".row");
  if (auto it = obj.find("col"); it != obj.end()) g.kind.col = resource(*it, net, where + ".col");
  const json& targets = field(obj, "targets", where);
  if (!targets.is_array()) bad(where, "'targets' must be a list");
  for (const auto& t : targets) g.targets.push_back(integer(t, where + ".targets"));
  g.onset_prob = number(field(obj, "onset_prob", where), where + ".onset_prob");
  if (auto it = obj.find("magnitude"); it != obj.end()) {
    if (it->is_number()) {
      g.magnitude_lo = g.magnitude_hi = it->get<double>();
    } else if (it->is_array() && it->size() == 2) {
      g.magnitude_lo = number((*it)[0], where + ".magnitude");
      g.magnitude_hi = number((*it)[1], where + ".magnitude");
    } else {
      bad(where, "'magnitude' must be a number or [lo, hi]");
    }
  }
  g.duration = read_duration_dist(obj, where);
  if (auto it = obj.find("seed"); it != obj.end()) {
    if (!it->is_number_unsigned()) bad(where, "'seed' must be a nonnegative integer");
    g.seed = it->get<std::uint64_t>();
  } else {
    g.seed = derive_seed(run_seed, k);
  }
  return g;
}

Grid<double> read_demands(const json& v, const Network& net) {
  const std::size_t N = net.agent_count();
  const std::size_t R = net.resource_count();
  Grid<double> out(N, R, 0.0);
  if (v.is_array()) {
    if (v.size() != N) bad("demands", "need one row per agent");
    for (std::size_t n = 0; n < N; ++n) {
      if (!v[n].is_array() || v[n].size() != R) bad("demands", "each row needs one value per resource");
      for (std::size_t r = 0; r < R; ++r) out(n, r) = number(v[n][r], "demands");
    }
    return out;
  }
  if (v.is_object()) {
    // Sparse form: {"<agent id>": {"<resource>": q}}; the rest stays 0.
    for (const auto& [key, row] : v.items()) {
      std::size_t n = 0;
      try {
        n = std::stoul(key);
      } catch (const std::exception&) {
        bad("demands", "agent key '" + key + "' is not an id");
      }
      if (n >= N) bad("demands", "agent " + key + " out of range");
      if (!row.is_object()) bad("demands", "agent entry must map resources to quantities");
      for (const auto& [rname, q] : row.items()) {
        out(n, resource(json(rname), net, "demands")) = number(q, "demands");
      }
    }
    return out;
  }
  bad("demands", "must be a matrix or an object");
}

Severity read_severity(const json& v) {
  Severity s;
  if (!v.is_object()) bad("severity", "must be an object");
  if (auto it = v.find("medium_matrix"); it != v.end()) s.medium_matrix = number(*it, "severity");
  if (auto it = v.find("heavy_matrix"); it != v.end()) s.heavy_matrix = number(*it, "severity");
  if (auto it = v.find("heavy_link_cost"); it != v.end()) s.heavy_link_cost = number(*it, "severity");
  return s;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const Network& net,
                              std::uint64_t run_seed, bool run_seed_wins) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte offset -> line
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError(e.what(), line);
  }
  if (!doc.is_object()) throw SchemaError("scenario file must hold a JSON object");

  ScenarioConfig cfg;
  cfg.hash = fnv1a_hex(text);
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) bad("seed", "must be a nonnegative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  const std::uint64_t seed = run_seed_wins ? run_seed : cfg.seed.value_or(run_seed);

  ScenarioSpec& spec = cfg.spec;
  if (auto it = doc.find("paper_scenario"); it != doc.end()) {
    const Severity sev = doc.contains("severity") ? read_severity(doc["severity"]) : Severity{};
    spec = build_paper_scenario(integer(*it, "paper_scenario"), net, sev);
  }
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) bad("name", "must be a string");
    spec.name = it->get<std::string>();
  }
  if (auto it = doc.find("horizon"); it != doc.end()) spec.horizon = integer(*it, "horizon");
  if (auto it = doc.find("events"); it != doc.end()) {
    if (!it->is_array()) bad("events", "must be a list");
    for (std::size_t k = 0; k < it->size(); ++k) {
      spec.timeline.push_back(read_event((*it)[k], net, "events[" + std::to_string(k) + "]"));
    }
  }
  if (auto it = doc.find("generators"); it != doc.end()) {
    if (!it->is_array()) bad("generators", "must be a list");
    for (std::size_t k = 0; k < it->size(); ++k) {
      spec.generators.push_back(
          read_generator((*it)[k], net, "generators[" + std::to_string(k) + "]", seed, k));
    }
  }
  if (auto it = doc.find("demands"); it != doc.end()) spec.demands = read_demands(*it, net);
  if (auto it = doc.find("allocation"); it != doc.end()) {
    if (!it->is_object()) bad("allocation", "must be an object");
    if (auto s = it->find("spill"); s != it->end()) {
      if (!s->is_boolean()) bad("allocation.spill", "must be true or false");
      spec.allocation.spill = s->get<bool>();
    }
    if (auto s = it->find("max_rounds"); s != it->end()) {
      spec.allocation.max_rounds = integer(*s, "allocation.max_rounds");
    }
  }
  static const char* kKnown[] = {"seed", "paper_scenario", "severity", "name", "horizon",
                                 "events", "generators", "demands", "allocation"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      bad(key, "unknown top-level key");
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path, const Network& net,
                             std::uint64_t run_seed, bool run_seed_wins) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), net, run_seed, run_seed_wins);
}

}  // namespace sosim
