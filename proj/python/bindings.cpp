#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "ionlattice/config.hpp"
#include "ionlattice/field.hpp"
#include "ionlattice/fit.hpp"
#include "ionlattice/geometry.hpp"
#include "ionlattice/metrics.hpp"
#include "ionlattice/pipelines.hpp"
#include "ionlattice/trap.hpp"

namespace py = pybind11;
using namespace ionlattice;

namespace {

py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

FitModel fit_model_from(const std::string& name) {
  if (name == "offset_power_law") return FitModel::kOffsetPowerLaw;
  if (name == "inverse_sqrt") return FitModel::kInverseSqrt;
  if (name == "through_origin") return FitModel::kThroughOrigin;
  throw py::value_error("unknown fit model '" + name + "'");
}

py::dict site_dict(const TrapSite& s) {
  py::dict d;
  d["i"] = s.index.i;
  d["j"] = s.index.j;
  d["position"] = s.null.position;
  d["status"] = std::string(to_string(s.status));
  d["ion_height"] = s.ion_height;
  d["omega"] = s.modes.omega;
  d["radial_omega"] = s.omega();
  d["depth_ev"] = s.depth_ev;
  d["eta_geo"] = s.eta_geo;
  d["zeta"] = s.zeta;
  d["q"] = s.q;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ionlattice, m) {
  m.doc() = "Surface-electrode ion-trap lattice design: fields, trap sites, metrics and pipelines.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::enum_<CellType>(m, "CellType")
      .value("square", CellType::kSquare)
      .value("hexagonal", CellType::kHexagonal)
      .value("centered_rectangular", CellType::kCenteredRectangular);

  py::class_<LatticeSpec>(m, "LatticeSpec")
      .def(py::init<>())
      .def_readwrite("cell_type", &LatticeSpec::cell_type)
      .def_readwrite("sites_per_side", &LatticeSpec::sites_per_side)
      .def_readwrite("polygon_sides", &LatticeSpec::polygon_sides)
      .def_readwrite("radius", &LatticeSpec::radius)
      .def_readwrite("separation", &LatticeSpec::separation)
      .def_readwrite("edge_gap", &LatticeSpec::edge_gap)
      .def_readwrite("orientation", &LatticeSpec::orientation)
      .def("validate", &LatticeSpec::validate);

  py::class_<ElectrodeLayout>(m, "ElectrodeLayout")
      .def_readwrite("rf_amplitude", &ElectrodeLayout::rf_amplitude)
      .def_property_readonly("contours",
                             [](const ElectrodeLayout& l) {
                               py::list out;
                               for (const auto& c : l.contours) {
                                 std::vector<Eigen::Vector2d> v = c.vertices;
                                 out.append(py::make_tuple(c.kind == ContourKind::kOuter ? "outer" : "hole",
                                                           v, c.signed_area()));
                               }
                               return out;
                             })
      .def("segment_count", &ElectrodeLayout::segment_count)
      .def("check", &check_layout, "Empty string when the layout is well formed");

  m.def("build_lattice_layout", &build_lattice_layout, py::arg("spec"), py::arg("rf_amplitude") = 1.0);
  m.def("build_five_wire", &build_five_wire, py::arg("rail_width"), py::arg("central_width"),
        py::arg("rail_length") = 3000e-6, py::arg("rf_amplitude") = 1.0);
  m.def("lattice_side_length", &lattice_side_length);
  m.def("site_positions", [](CellType type, int per_side, double separation) {
    std::vector<Eigen::Vector2d> out;
    for (const auto& s : generate_sites(type, per_side, separation)) out.push_back(s.position);
    return out;
  });

  py::class_<PseudoContext>(m, "PseudoContext")
      .def(py::init<>())
      .def(py::init([](double charge, double mass, double drive, double rf_amplitude) {
             return PseudoContext{charge, mass, drive, rf_amplitude};
           }),
           py::arg("charge"), py::arg("mass"), py::arg("drive"), py::arg("rf_amplitude"))
      .def_readwrite("charge", &PseudoContext::charge)
      .def_readwrite("mass", &PseudoContext::mass)
      .def_readwrite("drive", &PseudoContext::drive)
      .def_readwrite("rf_amplitude", &PseudoContext::rf_amplitude)
      .def("alpha", &PseudoContext::alpha);

  m.def("field_at", &field_at, py::arg("layout"), py::arg("point"));
  m.def("pseudopotential", &pseudopotential, py::arg("layout"), py::arg("ctx"), py::arg("point"));
  m.def("pseudo_hessian", &pseudo_hessian);

  m.def(
      "find_null",
      [](const ElectrodeLayout& layout, const Eigen::Vector3d& guess) {
        const NullResult r = find_null(layout, guess);
        py::dict d;
        d["status"] = std::string(to_string(r.status));
        d["position"] = r.position;
        d["residual"] = r.residual;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("layout"), py::arg("initial_guess"));

  m.def(
      "secular_frequencies",
      [](const ElectrodeLayout& layout, const PseudoContext& ctx, const Eigen::Vector3d& null) {
        const SecularModes s = secular_frequencies(layout, ctx, null);
        py::dict d;
        d["omega"] = s.omega;
        d["axes"] = Eigen::Matrix3d(s.axes);
        d["curvature"] = s.curvature;
        d["is_minimum"] = s.is_minimum;
        d["radial"] = s.radial();
        return d;
      },
      py::arg("layout"), py::arg("ctx"), py::arg("null"));

  m.def(
      "characterize_lattice",
      [](const LatticeSpec& spec, const PseudoContext& ctx, bool compute_depth) {
        const ElectrodeLayout layout = build_lattice_layout(spec, ctx.rf_amplitude);
        CharacterizeOptions opt;
        opt.compute_depth = compute_depth;
        py::list out;
        for (const auto& s : characterize_lattice(layout, ctx, generate_sites(spec.cell_type, spec.sites_per_side,
                                                                             spec.separation),
                                                  opt))
          out.append(site_dict(s));
        return out;
      },
      py::arg("spec"), py::arg("ctx"), py::arg("compute_depth") = true);

  m.def("stability_q", &stability_q);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("xi", &NoiseModel::xi)
      .def_readwrite("exponent", &NoiseModel::exponent)
      .def("spectral_density", &NoiseModel::spectral_density)
      .def_static("room_temperature", &NoiseModel::room_temperature)
      .def_static("cryogenic", &NoiseModel::cryogenic);

  m.def(
      "coupling_and_beta",
      [](double force, double mass, double omega, double separation) {
        const Coupling c = coupling_and_beta(force, mass, omega, separation);
        return py::dict(py::arg("beta") = c.beta, py::arg("rate") = c.rate,
                        py::arg("interaction_time") = c.interaction_time, py::arg("short_range") = c.short_range);
      },
      py::arg("force"), py::arg("mass"), py::arg("omega"), py::arg("separation"));
  m.def(
      "heating_and_ksim",
      [](double mass, double omega, double separation, double ion_height, double force, const NoiseModel& noise) {
        const Heating h = heating_and_ksim(mass, omega, separation, ion_height, force, noise);
        return py::dict(py::arg("noise_density") = h.noise_density, py::arg("heating_time") = h.heating_time,
                        py::arg("ksim") = h.ksim, py::arg("interaction_time") = h.interaction_time);
      },
      py::arg("mass"), py::arg("omega"), py::arg("separation"), py::arg("ion_height"), py::arg("force"),
      py::arg("noise"));
  m.def(
      "optimized_closed_forms",
      [](double k_r, double k_A, double alpha, double mass, double eta_geo, double force, const NoiseModel& noise) {
        const OptimizedForms f = optimized_closed_forms(k_r, k_A, alpha, mass, eta_geo, force, noise);
        return py::dict(py::arg("omega") = f.omega, py::arg("ksim") = f.ksim,
                        py::arg("interaction_time") = f.interaction_time);
      });
  m.def("sim_error", &sim_error, py::arg("force"), py::arg("mass"), py::arg("omega"),
        py::arg("observable_sites"), py::arg("mean_phonon"));
  m.def("power_dissipation", &power_dissipation);
  m.def(
      "unique_operating_point",
      [](double mass, double q, double k_r, double eta_geo, double alpha, double capacitance, double resistance) {
        const OperatingPoint p = unique_operating_point(mass, q, k_r, eta_geo, alpha, capacitance, resistance);
        return py::dict(py::arg("voltage") = p.voltage, py::arg("drive") = p.drive, py::arg("power") = p.power);
      });

  m.def(
      "fit_scaling_law",
      [](const std::string& model, const std::vector<double>& x, const std::vector<double>& y, std::uint64_t seed) {
        FitOptions opt;
        opt.seed = seed;
        return to_python(fit_to_json(fit_scaling_law(fit_model_from(model), x, y, opt)));
      },
      py::arg("model"), py::arg("x"), py::arg("y"), py::arg("seed") = 1,
      "model is one of offset_power_law, inverse_sqrt, through_origin");

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("parse", &RunConfig::parse)
      .def_static("load", &RunConfig::load)
      .def("set", &RunConfig::set)
      .def("validate", &RunConfig::validate)
      .def("to_text", &RunConfig::to_text)
      .def("hash", &RunConfig::hash)
      .def("entries", [](const RunConfig& c) {
        py::dict d;
        for (const auto& [k, v] : c.entries()) d[py::str(k)] = v;
        return d;
      });

  m.def("run_validation", [](const RunConfig& c) { return to_python(validation_to_json(run_validation(c))); });
  m.def("run_case_study", [](const RunConfig& c) { return to_python(case_study_to_json(run_case_study(c))); });
  m.def("run_command", &run_command, py::arg("name"), py::arg("config"), py::arg("out"),
        "Runs one pipeline, writes its files and returns the exit code");
  m.def("command_names", &command_names);

  m.attr("__version__") = "0.1.0";
}
