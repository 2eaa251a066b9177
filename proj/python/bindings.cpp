#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "edchrom/config.hpp"
#include "edchrom/harness.hpp"
#include "edchrom/isotherm.hpp"
#include "edchrom/output.hpp"
#include "edchrom/stepper.hpp"
#include "edchrom/transform.hpp"

namespace py = pybind11;
using namespace edchrom;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Field (N x m) <-> numpy array of shape (N, m).
Array to_numpy(const Field& f) {
  Array out({f.components(), f.cells()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < f.components(); ++i)
    for (std::size_t j = 0; j < f.cells(); ++j) v(i, j) = f(i, j);
  return out;
}

Field from_numpy(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array of shape (N, m)");
  auto v = a.unchecked<2>();
  Field f(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) f(i, j) = v(i, j);
  return f;
}

std::vector<double> vec(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_edchrom, m) {
  m.doc() = "Equilibrium-dispersive chromatography solver";

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  std::vector<std::string> names;
  for (SchemeKind s : kAllSchemes) names.emplace_back(scheme_name(s));
  m.attr("SCHEMES") = names;

  py::class_<IsothermModel>(m, "IsothermModel")
      .def(py::init([](std::vector<double> a, std::vector<double> b, double porosity, double nu) {
             return IsothermModel(IsothermParams{std::move(a), std::move(b), porosity, nu});
           }),
           py::arg("a"), py::arg("b"), py::arg("porosity") = 0.5, py::arg("nu") = 1.0)
      .def_property_readonly("size", &IsothermModel::size)
      .def_property_readonly("nu", &IsothermModel::nu)
      .def_property_readonly("porosity", &IsothermModel::porosity);

  // Single states in user component order.
  m.def("forward", [](const IsothermModel& model, const Array& c) {
    std::vector<double> ci = model.to_internal(vec(c));
    std::vector<double> w(ci.size());
    forward(model, ci, w);
    return model.to_user(w);
  }, py::arg("model"), py::arg("c"), "W(c) for one state");
  m.def("inverse", [](const IsothermModel& model, const Array& w) {
    std::vector<double> wi = model.to_internal(vec(w));
    std::vector<double> c(wi.size());
    inverse(model, wi, c);
    return model.to_user(c);
  }, py::arg("model"), py::arg("w"), "C(w) for one state");

  py::class_<Snapshot>(m, "Snapshot")
      .def_readonly("t", &Snapshot::t)
      .def_property_readonly("w", [](const Snapshot& s) { return to_numpy(s.w); })
      .def_property_readonly("c", [](const Snapshot& s) { return to_numpy(s.c); });

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("snapshots", &RunResult::snapshots)
      .def_readonly("steps", &RunResult::steps)
      .def_readonly("dt_min", &RunResult::dt_min)
      .def_readonly("dt_max", &RunResult::dt_max)
      .def_readonly("wall_seconds", &RunResult::wall_seconds)
      .def_property_readonly("mass_imbalance", [](const RunResult& r) { return r.mass.imbalance(); });

  m.def("experiment_config", [](int id) { return config_text(request_from_preset(id)); },
        py::arg("id"), "Config text of an experiment preset");
  m.def("run_config", [](const std::string& text) {
    const RunRequest req = parse_config_text(text);
    const IsothermModel model(req.isotherm);
    py::gil_scoped_release release;
    return run(req.config, model);
  }, py::arg("text"), "Parse config text and integrate it");

  m.def("restrict_reference", [](const Array& ref, std::size_t cells) {
    return to_numpy(restrict_reference(from_numpy(ref), cells));
  }, py::arg("reference"), py::arg("cells"));
  m.def("l1_error", [](const Array& sol, const Array& ref) {
    return l1_error(from_numpy(sol), from_numpy(ref));
  }, py::arg("solution"), py::arg("reference"));
  m.def("trimmed_l1_error", [](const Array& sol, const Array& ref, double trim) {
    return trimmed_l1_error(from_numpy(sol), from_numpy(ref), trim);
  }, py::arg("solution"), py::arg("reference"), py::arg("trim_fraction") = 0.02);
  m.def("convergence_order", &convergence_order, py::arg("e_m"), py::arg("e_2m"));
}
