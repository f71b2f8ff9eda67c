#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sosim/allocation.hpp"
#include "sosim/cli.hpp"
#include "sosim/errors.hpp"
#include "sosim/gml.hpp"
#include "sosim/production.hpp"
#include "sosim/scenario.hpp"
#include "sosim/topology.hpp"

namespace py = pybind11;
using namespace sosim;

namespace {

py::object cost_or_none(const Cost& c) {
  return c.available() ? py::cast(c.value()) : py::none();
}

std::vector<std::vector<py::object>> cost_table(const Grid<Cost>& g) {
  std::vector<std::vector<py::object>> out(g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (const Cost& c : g.row(i)) out[i].push_back(cost_or_none(c));
  }
  return out;
}

std::vector<std::vector<double>> table(const Grid<double>& g) {
  std::vector<std::vector<double>> out(g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) out[i].assign(g.row(i).begin(), g.row(i).end());
  return out;
}

py::dict curve_dict(const SupplyCurve& c) {
  py::list steps;
  for (const auto& s : c.steps) steps.append(py::make_tuple(s.quantity, s.cost));
  py::dict d;
  d["steps"] = steps;
  d["demanded_total"] = c.demanded_total;
  d["truncated"] = c.truncated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sosim, m) {
  m.doc() = "C++ core of the sosim simulator";

  static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<SimulationError> sim_error(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const SimulationError& e) {
      py::set_error(sim_error, e.what());
    }
  });

  py::class_<Network>(m, "Network")
      .def_property_readonly("agent_count", &Network::agent_count)
      .def_property_readonly("link_count", &Network::link_count)
      .def_property_readonly("resources", [](const Network& n) { return n.catalog.names(); })
      .def_property_readonly("labels",
                             [](const Network& n) {
                               std::vector<std::string> out;
                               for (const auto& a : n.agents) out.push_back(a.label);
                               return out;
                             })
      .def("validation_errors",
           [](const Network& n) {
             std::vector<std::string> out;
             for (const auto& v : validate_network(n).violations) out.push_back(v.message);
             return out;
           })
      .def("__eq__", [](const Network& a, const Network& b) { return a == b; });

  m.def("block_fixture", &block_fixture);
  m.def("validation_fixture_3node", &validation_fixture_3node);
  m.def(
      "erdos_renyi",
      [](int n, double p, std::uint64_t seed, std::size_t resources) {
        GeneratorOptions opts;
        opts.resources = resources;
        return erdos_renyi(n, p, RoleMix{}, seed, opts);
      },
      py::arg("n"), py::arg("p"), py::arg("seed") = 0, py::arg("resources") = 6);

  m.def("read_gml", [](const std::string& text) { return read_gml(text); });
  m.def("write_gml", &to_gml);

  m.def(
      "spectral_radius",
      [](const std::vector<std::vector<double>>& rows) {
        const std::size_t R = rows.size();
        std::vector<double> flat;
        for (const auto& row : rows) {
          if (row.size() != R) throw py::value_error("matrix must be square");
          flat.insert(flat.end(), row.begin(), row.end());
        }
        const TechnologyMatrix A(R, std::move(flat));
        ResourceSet all(R);
        for (std::size_t r = 0; r < R; ++r) all[r] = r;
        return productivity_check(A, all).radius;
      },
      py::arg("matrix"));

  m.def("price", [](const Network& n) { return cost_table(price_fixed_point(n).sell_cost); });

  m.def("allocate_summary", [](const Network& n) {
    const FlowState st = allocate(n);
    py::dict d;
    d["total_cost"] = total_cost(st);
    d["total_shortfall"] = total_shortfall(st);
    d["served"] = table(st.served);
    d["delivered_cost"] = cost_table(st.delivered_cost);
    d["conservation_error"] = conservation_error(n, st);
    return d;
  });

  m.def(
      "paper_suite",
      [](const std::vector<double>& scales) {
        py::list out;
        for (const auto& e : paper_suite(block_fixture(), scales)) {
          py::dict d;
          d["name"] = e.name;
          d["total_cost"] = e.total_cost;
          d["total_shortfall"] = e.total_shortfall;
          d["curve"] = curve_dict(e.curve);
          out.append(d);
        }
        return out;
      },
      py::arg("scales") = std::vector<double>{1.0});

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"sosim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(rc, out.str(), err.str());
  });
}
