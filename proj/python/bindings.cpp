#include "fsilab/app.hpp"
#include "fsilab/diagnostics.hpp"
#include "fsilab/verify.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fsilab;

namespace {

py::dict command_dict(const CommandResult& r) {
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["report"] = r.report.dump();
  d["artifacts"] = r.artifacts;
  d["message"] = r.message;
  return d;
}

py::dict columns(const std::vector<CsvRow>& rows) {
  std::vector<std::vector<double>> c(14);
  std::vector<int> sub;
  for (const CsvRow& r : rows) {
    const double v[14] = {r.t,       r.E_total,          r.kinetic_fluid, r.kinetic_plate, r.bending,
                          r.membrane, r.dissipation_cum, r.work_cum,      r.balance_residual,
                          r.E_tilde, r.Lambda,           r.ball_residual, r.mean_w,        r.interface_residual};
    for (int k = 0; k < 14; ++k) c[k].push_back(v[k]);
    sub.push_back(r.subiterations);
  }
  static const char* names[14] = {"t",        "E_total",         "kinetic_fluid", "kinetic_plate", "bending",
                                  "membrane", "dissipation_cum", "work_cum",      "balance_residual",
                                  "E_tilde",  "Lambda",          "ball_residual", "mean_w",        "interface_residual"};
  py::dict d;
  for (int k = 0; k < 14; ++k) d[names[k]] = c[k];
  d["subiterations"] = sub;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<RunConfig>(m, "RunConfig")
      .def("canonical", &RunConfig::canonical)
      .def("hash", [](const RunConfig& c) { return hex64(c.hash()); })
      .def_readwrite("t_end", &RunConfig::t_end)
      .def_readwrite("snapshot_stride", &RunConfig::snapshot_stride)
      .def_readwrite("omegas", &RunConfig::omegas)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("seed", &RunConfig::seed)
      .def_property(
          "dt", [](const RunConfig& c) { return c.model.dt; }, [](RunConfig& c, double v) { c.model.dt = v; })
      .def_property_readonly("nu", [](const RunConfig& c) { return c.model.nu; })
      .def_property_readonly("mu", [](const RunConfig& c) { return c.model.mu; });

  m.def("parse_config", &parse_config, py::arg("text"), py::arg("format") = "ini");
  m.def("load_config", &load_config, py::arg("path"));

  m.def(
      "simulate",
      [](const RunConfig& cfg) {
        SimulationResult r;
        {
          py::gil_scoped_release release;
          r = simulate(cfg);
        }
        py::dict d;
        d["columns"] = columns(r.rows);
        d["summary"] = r.summary.dump();
        d["error"] = r.error;
        d["audits_passed"] = r.audits_passed;
        return d;
      },
      py::arg("config"));

  m.def(
      "cmd_simulate",
      [](const RunConfig& cfg, const std::string& out) {
        py::gil_scoped_release release;
        CommandResult r = cmd_simulate(cfg, out);
        py::gil_scoped_acquire acquire;
        return command_dict(r);
      },
      py::arg("config"), py::arg("output_dir"));
  m.def(
      "cmd_verify",
      [](const RunConfig& cfg, const std::string& suite, const std::string& out) {
        py::gil_scoped_release release;
        CommandResult r = cmd_verify(cfg, suite, out);
        py::gil_scoped_acquire acquire;
        return command_dict(r);
      },
      py::arg("config"), py::arg("suite"), py::arg("output_dir"));
  m.def(
      "cmd_probe",
      [](const RunConfig& cfg, const std::string& kind, const std::string& out) {
        py::gil_scoped_release release;
        CommandResult r = cmd_probe(cfg, kind, out);
        py::gil_scoped_acquire acquire;
        return command_dict(r);
      },
      py::arg("config"), py::arg("kind"), py::arg("output_dir"));

  m.def("suite_names", &suite_names);

  m.def(
      "decay_fit",
      [](const std::vector<double>& t, const std::vector<double>& y, bool fit_offset) {
        const DecayFit f = decay_fit(t, y, fit_offset);
        py::dict d;
        d["rate"] = f.rate;
        d["offset"] = f.offset;
        d["amplitude"] = f.amplitude;
        return d;
      },
      py::arg("t"), py::arg("y"), py::arg("fit_offset") = false);
}
