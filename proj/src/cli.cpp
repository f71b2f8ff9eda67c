#include "sosim/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sosim/config.hpp"
#include "sosim/errors.hpp"
#include "sosim/gml.hpp"
#include "sosim/production.hpp"
#include "sosim/results.hpp"
#include "sosim/scenario.hpp"
#include "sosim/topology.hpp"

namespace sosim {

namespace {

const char* kind_of(const SimulationError& e) {
  if (dynamic_cast<const NotProductive*>(&e)) return "NotProductive";
  if (dynamic_cast<const NotProducible*>(&e)) return "NotProducible";
  if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
  if (dynamic_cast<const UnpricedDemand*>(&e)) return "UnpricedDemand";
  if (dynamic_cast<const UnresolvedTarget*>(&e)) return "UnresolvedTarget";
  if (dynamic_cast<const Disconnected*>(&e)) return "Disconnected";
  if (dynamic_cast<const UnknownScenario*>(&e)) return "UnknownScenario";
  return "SimulationError";
}

// Demand levels of the two reported columns, as fractions of the fixture total.
constexpr double kBlockTotalDemand = 570.5;
constexpr double kLowDemand = 44.0;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SOSIM_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("SOSIM_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

std::vector<double> parse_scales(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (tok.find_first_not_of(" \t", used) != std::string::npos || !(v >= 0.0)) throw 0;
      out.push_back(v);
    } catch (...) {
      throw ValidationError("bad scale '" + tok + "'");
    }
  }
  if (out.empty()) throw ValidationError("no scales given");
  return out;
}

Network load_network(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  Network net = read_gml_file(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  require_valid(net);
  return net;
}

template <class F>
void with_output(const std::string& path, std::ostream& out, F write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  write(file);
  file.flush();
  if (!file) throw IoError("failed writing " + path);
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const Network net = read_gml_file(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  const ValidationReport report = validate_network(net);
  if (!report.ok()) {
    err << report.to_string();
    return kExitInput;
  }
  int bad = 0;
  for (const auto& a : net.agents) {
    const ResourceSet made = producible_set(a);
    if (made.empty()) continue;
    const auto pr = productivity_check(a.tech, made);
    if (!pr.productive) {
      err << a.label << ": technology matrix not productive (spectral radius "
          << format_double(pr.radius) << ")\n";
      ++bad;
    }
  }
  if (bad) return kExitInput;
  out << "ok: " << net.agent_count() << " agents, " << net.links.size() << " links, "
      << net.resource_count() << " resources\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resource-flow simulator for agent networks"};
  app.require_subcommand(1);

  std::string network, scenario, out_path, name, format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> timesteps;
  std::string scales_text;
  int nodes = 0;
  double p = 0.0;
  std::size_t resources = 6;

  auto* validate = app.add_subcommand("validate", "Check a network file");
  validate->add_option("--network", network, "GML network")->required();

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and export per-timestep results");
  run_cmd->add_option("--network", network, "GML network")->required();
  run_cmd->add_option("--scenario", scenario, "JSON scenario file");
  run_cmd->add_option("--timesteps", timesteps, "Override the scenario horizon")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Run seed (default: $SOSIM_SEED or 0)");
  run_cmd->add_option("--out", out_path, "Output file, '-' for stdout");
  run_cmd->add_option("--format", format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* sweep = app.add_subcommand("sweep", "Supply curve over demand scale factors");
  sweep->add_option("--network", network, "GML network")->required();
  sweep->add_option("--scales", scales_text, "Comma-separated factors")->required();
  sweep->add_option("--out", out_path, "Output CSV, '-' for stdout");

  auto* generate = app.add_subcommand("generate", "Random G(n, p) network");
  generate->add_option("--nodes", nodes, "Agent count")->required()->check(CLI::Range(2, 1000000));
  generate->add_option("--p", p, "Edge probability")->required()->check(CLI::Range(0.0, 1.0));
  generate->add_option("--seed", seed, "Seed (default: $SOSIM_SEED or 0)");
  generate->add_option("--resources", resources, "Resource count")->check(CLI::Range(1, 64));
  generate->add_option("--out", out_path, "Output GML, '-' for stdout");

  auto* fixtures = app.add_subcommand("fixtures", "Write a built-in network");
  fixtures->add_option("--name", name, "block or 3node")
      ->required()
      ->check(CLI::IsMember({"block", "3node"}));
  fixtures->add_option("--out", out_path, "Output GML, '-' for stdout");

  auto* suite = app.add_subcommand("paper-suite", "Base plus eight disruption scenarios on the block fixture");
  suite->add_option("--out", out_path, "Output directory")->required();
  suite->add_option("--scales", scales_text, "Comma-separated demand factors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kExitInput;
  }

  try {
    if (*validate) return cmd_validate(network, out, err);

    if (*run_cmd) {
      const Network net = load_network(network, err);
      const std::uint64_t run_seed = seed ? *seed : default_seed();
      ScenarioConfig cfg;
      if (!scenario.empty()) {
        cfg = load_scenario(scenario, net, run_seed, seed.has_value());
      } else {
        cfg.spec.name = "base";
        cfg.hash = fnv1a_hex("");
      }
      if (timesteps) cfg.spec.horizon = *timesteps;
      const std::uint64_t effective = seed ? *seed : cfg.seed.value_or(run_seed);
      const RunResult result = run(net, cfg.spec, effective, cfg.hash);
      const ResultFormat fmt = format == "csv" ? ResultFormat::Csv : ResultFormat::JsonLines;
      with_output(out_path, out, [&](std::ostream& o) { export_results(result, fmt, o); });
      return kExitOk;
    }

    if (*sweep) {
      const Network net = load_network(network, err);
      const SupplyCurve curve =
          supply_curve(net, final_demands(net), parse_scales(scales_text), {}, "sweep");
      with_output(out_path, out, [&](std::ostream& o) { export_curve(curve, o); });
      if (curve.truncated) {
        err << "note: demand could not be met beyond scale "
            << (curve.truncated_at ? format_double(*curve.truncated_at) : std::string("?"))
            << "\n";
      }
      return kExitOk;
    }

    if (*generate) {
      GeneratorOptions opts;
      opts.resources = resources;
      const Network net = erdos_renyi(nodes, p, RoleMix{}, seed ? *seed : default_seed(), opts);
      with_output(out_path, out, [&](std::ostream& o) { write_gml(net, o); });
      return kExitOk;
    }

    if (*fixtures) {
      const Network net = name == "block" ? block_fixture() : validation_fixture_3node();
      with_output(out_path, out, [&](std::ostream& o) { write_gml(net, o); });
      return kExitOk;
    }

    if (*suite) {
      const std::vector<double> scales =
          scales_text.empty() ? std::vector<double>{kLowDemand / kBlockTotalDemand, 1.0}
                              : parse_scales(scales_text);
      const std::vector<SuiteEntry> entries = paper_suite(block_fixture(), scales);
      namespace fs = std::filesystem;
      std::error_code ec;
      fs::create_directories(out_path, ec);
      if (ec) throw IoError("cannot create " + out_path + ": " + ec.message());
      for (const auto& e : entries) {
        export_curve_file(e.curve, (fs::path(out_path) / ("curve_" + e.name + ".csv")).string());
      }
      // Priced so the base scenario is fully served.
      const double reference = entries.front().curve.steps.empty()
                                   ? 0.0
                                   : entries.front().curve.steps.back().cost;
      with_output((fs::path(out_path) / "costs.csv").string(), out,
                  [&](std::ostream& o) { export_suite_costs(entries, reference, o); });
      for (int id : severity_order()) {
        const auto& e = entries[static_cast<std::size_t>(id)];
        out << e.name << " " << format_double(e.total_cost) << "\n";
      }
      return kExitOk;
    }
  } catch (const SimulationError& e) {
    err << "simulation error (" << kind_of(e) << "): " << e.what() << "\n";
    return kExitSimulation;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace sosim
