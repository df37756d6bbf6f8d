#include "quantrel/errors.hpp"
#include "quantrel/experiments.hpp"
#include "quantrel/io.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace quantrel;
using io::json;

namespace {

json to_cpp(const py::object& o) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return io::parse_json(dumps(o).cast<std::string>());
}

py::object to_py(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

NonlocalityOptions nl_options(int level, const std::string& pinned) {
  NonlocalityOptions o;
  o.level = level;
  if (pinned == "alice") o.pinned = Party::alice;
  else if (pinned != "bob") throw ValidationError("pinned must be alice or bob");
  return o;
}

std::vector<std::vector<CMatrix>> grid(const std::vector<std::vector<HermitianOperator>>& g) {
  std::vector<std::vector<CMatrix>> out;
  for (const auto& row : g) {
    out.emplace_back();
    for (const auto& h : row) out.back().push_back(h.matrix());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_quantrel, m) {
  m.doc() = "Quantifiers of measurement incompatibility, steering and Bell nonlocality";

  static py::exception<ValidationError> validation(m, "ValidationError", PyExc_ValueError);
  static py::exception<SolverError> solver(m, "SolverError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const Error& e) {
      py::set_error(solver, e.what());
    }
  });

  m.def("measurement_effects",
        [](const std::string& spec) { return grid(parse_measurement_spec(spec).effects()); },
        py::arg("spec"), "Effects [x][a] of a measurement spec such as 'paulis:XZ'.");
  m.def("state_matrix",
        [](const std::string& spec) { return make_state(parse_state_spec(spec)).rho().matrix(); },
        py::arg("spec"));
  m.def("assemblage",
        [](const std::string& state, const std::string& alice) {
          return grid(steer(make_state(parse_state_spec(state)), parse_measurement_spec(alice)).members());
        },
        py::arg("state"), py::arg("alice"));
  m.def("behaviour",
        [](const std::string& state, const std::string& alice, const std::string& bob) {
          return to_py(io::to_json(measure(make_state(parse_state_spec(state)),
                                           parse_measurement_spec(alice), parse_measurement_spec(bob))));
        },
        py::arg("state"), py::arg("alice"), py::arg("bob"));

  m.def("incompatibility",
        [](const py::object& input, const std::string& kind) {
          return to_py(io::to_json(incompatibility_quantifier(io::measurements_from_input(to_cpp(input)),
                                                              parse_incompat_kind(kind))));
        },
        py::arg("input"), py::arg("kind"),
        "Input as accepted by the CLI, e.g. {'measurements': 'paulis:XZ'}.");
  m.def("steering",
        [](const py::object& input, const std::string& kind) {
          return to_py(io::to_json(steering_quantifier(io::assemblage_from_input(to_cpp(input)),
                                                       parse_steering_kind(kind))));
        },
        py::arg("input"), py::arg("kind"));
  m.def("nonlocality",
        [](const py::object& input, const std::string& kind, int level, const std::string& pinned) {
          Behaviour b = io::behaviour_from_input(to_cpp(input));
          if (b.signalling()) b = ns_project(b).behaviour;
          return to_py(io::to_json(nonlocality_quantifier(b, parse_nonlocality_kind(kind),
                                                          nl_options(level, pinned))));
        },
        py::arg("input"), py::arg("kind"), py::arg("level") = 2, py::arg("pinned") = "bob");
  m.def("ns_project",
        [](const py::object& input) {
          return to_py(io::to_json(ns_project(io::behaviour_from_input(to_cpp(input)))));
        },
        py::arg("input"));
  m.def("seesaw",
        [](double theta, const std::string& kind, int restarts, std::uint64_t seed) {
          SeesawOptions o;
          o.restarts = restarts;
          o.seed = seed;
          const SeesawResult r = seesaw_optimize(theta, parse_nonlocality_kind(kind), o);
          return py::make_tuple(r.value, to_py(io::to_json(r.bob)));
        },
        py::arg("theta"), py::arg("kind"), py::arg("restarts") = 1, py::arg("seed") = 1);
}
