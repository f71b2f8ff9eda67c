#include "sosim/results.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "sosim/errors.hpp"
#include "sosim/gml.hpp"

namespace sosim {

namespace {

std::string cost_text(const Cost& c) {
  return c.available() ? format_double(c.value()) : std::string("NA");
}

void header(const RunResult& r, std::ostream& out) {
  out << "# scenario: " << r.scenario << "\n";
  out << "# seed: " << r.seed << "\n";
  out << "# config_hash: " << r.config_hash << "\n";
  out << "# rng: " << r.rng << "\n";
}

void csv(const RunResult& r, std::ostream& out) {
  header(r, out);
  out << "timestep,scenario,total_cost,total_shortfall";
  for (const auto& label : r.consumer_labels) out << ",cost_" << label;
  out << "\n";
  for (const auto& s : r.steps) {
    out << s.timestep << ',' << r.scenario << ',' << format_double(s.total_cost) << ','
        << format_double(s.total_shortfall);
    for (const auto& c : s.consumer_cost) out << ',' << cost_text(c);
    out << "\n";
  }
}

void json_lines(const RunResult& r, std::ostream& out) {
  using nlohmann::ordered_json;
  ordered_json head;
  head["scenario"] = r.scenario;
  head["seed"] = r.seed;
  head["config_hash"] = r.config_hash;
  head["rng"] = r.rng;
  head["consumers"] = r.consumer_labels;
  out << head.dump() << "\n";
  for (const auto& s : r.steps) {
    ordered_json row;
    row["timestep"] = s.timestep;
    row["scenario"] = r.scenario;
    row["total_cost"] = s.total_cost;
    row["total_shortfall"] = s.total_shortfall;
    ordered_json costs = ordered_json::object();
    for (std::size_t k = 0; k < s.consumer_cost.size(); ++k) {
      const Cost& c = s.consumer_cost[k];
      costs[r.consumer_labels[k]] = c.available() ? ordered_json(c.value()) : ordered_json();
    }
    row["consumer_cost"] = std::move(costs);
    row["active_events"] = s.active_events;
    out << row.dump() << "\n";
  }
}

template <class F>
void to_file(const std::string& path, F write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace

void export_results(const RunResult& result, ResultFormat format, std::ostream& out) {
  if (format == ResultFormat::Csv) {
    csv(result, out);
  } else {
    json_lines(result, out);
  }
  if (!out) throw IoError("failed writing results");
}

void export_results_file(const RunResult& result, ResultFormat format,
                         const std::string& path) {
  to_file(path, [&](std::ostream& out) { export_results(result, format, out); });
}

void export_curve(const SupplyCurve& curve, std::ostream& out) {
  out << "# provenance: " << curve.provenance << "\n";
  out << "# demanded_total: " << format_double(curve.demanded_total) << "\n";
  if (curve.truncated) {
    out << "# truncated_at_scale: "
        << (curve.truncated_at ? format_double(*curve.truncated_at) : std::string("NA")) << "\n";
  }
  out << "quantity,cost\n";
  for (const auto& s : curve.steps) {
    out << format_double(s.quantity) << ',' << format_double(s.cost) << "\n";
  }
  if (!out) throw IoError("failed writing supply curve");
}

void export_curve_file(const SupplyCurve& curve, const std::string& path) {
  to_file(path, [&](std::ostream& out) { export_curve(curve, out); });
}

void export_suite_costs(const std::vector<SuiteEntry>& suite, double reference_price,
                        std::ostream& out) {
  out << "# reference_price: " << format_double(reference_price) << "\n";
  out << "scenario,total_cost,total_shortfall,satisfied_fraction\n";
  for (const auto& e : suite) {
    out << e.name << ',' << format_double(e.total_cost) << ',' << format_double(e.total_shortfall)
        << ',' << format_double(satisfied_fraction(e.curve, reference_price)) << "\n";
  }
  if (!out) throw IoError("failed writing cost table");
}

}  // namespace sosim
