#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lowmach/cli.hpp"
#include "lowmach/errors.hpp"
#include "lowmach/estimates.hpp"
#include "lowmach/geometry.hpp"
#include "lowmach/harness.hpp"
#include "lowmach/thermo.hpp"

namespace py = pybind11;
using namespace lowmach;

namespace {

py::array_t<double> cell_array(const CellField& f) {
  const Index3& n = f.grid.n;
  std::vector<py::ssize_t> shape;
  if (f.grid.dim == 3) shape.push_back(n[2]);
  shape.push_back(n[1]);
  shape.push_back(n[0]);
  py::array_t<double> a(shape);
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low Mach number limit lab: thermodynamics, perforations, estimates and the CLI.";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<GeometryError>(m, "GeometryError");
  py::register_exception<FitError>(m, "FitError");
  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<DomainError>(m, "DomainError");

  py::class_<thermo::ThermoParams>(m, "ThermoParams")
      .def(py::init<>())
      .def_readwrite("rho_bar", &thermo::ThermoParams::rho_bar)
      .def_readwrite("theta_bar", &thermo::ThermoParams::theta_bar)
      .def_readwrite("a_rad", &thermo::ThermoParams::a_rad)
      .def_readwrite("mu0", &thermo::ThermoParams::mu0)
      .def_readwrite("eta0", &thermo::ThermoParams::eta0)
      .def_readwrite("kappa0", &thermo::ThermoParams::kappa0)
      .def_readwrite("p_inf", &thermo::ThermoParams::p_inf);

  py::class_<thermo::LinearizationCoeffs>(m, "LinearizationCoeffs")
      .def_readonly("A", &thermo::LinearizationCoeffs::A)
      .def_readonly("c_p", &thermo::LinearizationCoeffs::c_p)
      .def_readonly("a_th", &thermo::LinearizationCoeffs::a_th)
      .def_readonly("dp_drho", &thermo::LinearizationCoeffs::dp_drho)
      .def_readonly("dp_dtheta", &thermo::LinearizationCoeffs::dp_dtheta);

  m.def("pressure", &thermo::pressure, py::arg("rho"), py::arg("theta"), py::arg("params"));
  m.def("internal_energy", &thermo::internal_energy, py::arg("rho"), py::arg("theta"), py::arg("params"));
  m.def("entropy", &thermo::entropy, py::arg("rho"), py::arg("theta"), py::arg("params"));
  m.def("linearization", &thermo::linearization, py::arg("params"));

  py::class_<GammaExponents>(m, "GammaExponents")
      .def_readonly("gamma1", &GammaExponents::gamma1)
      .def_readonly("gamma2", &GammaExponents::gamma2)
      .def_readonly("gamma3", &GammaExponents::gamma3)
      .def("all_positive", &GammaExponents::all_positive)
      .def("__repr__", [](const GammaExponents& g) {
        return "GammaExponents(" + std::to_string(g.gamma1) + ", " + std::to_string(g.gamma2) +
               ", " + std::to_string(g.gamma3) + ")";
      });
  m.def("gamma_exponents", &gamma_exponents, py::arg("m"), py::arg("alpha"));

  py::class_<ScalingFit>(m, "ScalingFit")
      .def_readonly("exponent", &ScalingFit::exponent)
      .def_readonly("r2", &ScalingFit::r2)
      .def_readonly("degenerate", &ScalingFit::degenerate)
      .def_readonly("samples", &ScalingFit::samples);
  m.def("scaling_fit", &scaling_fit, py::arg("samples"),
        "Power-law fit of (epsilon, value) pairs: value ~ epsilon^exponent.");

  py::class_<ScalingParams>(m, "ScalingParams")
      .def(py::init([](double eps, double alpha, double mm, int dim) {
             return ScalingParams{eps, alpha, mm, dim};
           }),
           py::arg("epsilon"), py::arg("alpha"), py::arg("m"), py::arg("dim") = 2)
      .def_readwrite("epsilon", &ScalingParams::epsilon)
      .def_readwrite("alpha", &ScalingParams::alpha)
      .def_readwrite("m", &ScalingParams::m)
      .def_readwrite("dim", &ScalingParams::dim)
      .def("mach", &ScalingParams::mach)
      .def("theory_regime", &ScalingParams::theory_regime);

  py::class_<PerforatedGeometry>(m, "PerforatedGeometry")
      .def_readonly("hole_radius", &PerforatedGeometry::hole_radius)
      .def_readonly("guard_radius", &PerforatedGeometry::guard_radius)
      .def_readonly("disjoint_radius", &PerforatedGeometry::disjoint_radius)
      .def_readonly("centers", &PerforatedGeometry::centers)
      .def("count", &PerforatedGeometry::count);
  m.def(
      "build_perforation",
      [](const ScalingParams& s, double length, const std::string& placement, std::uint64_t seed) {
        return build_perforation(s, length, parse_placement(placement), seed);
      },
      py::arg("scaling"), py::arg("length") = 1.0, py::arg("placement") = "lattice",
      py::arg("seed") = 0);
  m.def(
      "hole_measure",
      [](const PerforatedGeometry& g, int cells) {
        const Grid grid = Grid::uniform(g.scaling.dim, cells, g.length);
        const HoleMeasure h = hole_measure(g, cells > 0 ? &grid : nullptr);
        return py::dict(py::arg("analytic") = h.analytic, py::arg("rasterized") = h.rasterized,
                        py::arg("bound_ratio") = h.bound_ratio);
      },
      py::arg("geometry"), py::arg("cells") = 0);

  m.def(
      "normalize_config",
      [](const std::string& text) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(e.what());
        }
        return to_json(parse_config(j)).dump();
      },
      py::arg("json_text"), "Validates a configuration and returns it with every default filled in.");

  m.def(
      "read_cell_field",
      [](const std::string& path, int dim) { return cell_array(read_cell_field(path, dim)); },
      py::arg("path"), py::arg("dim") = 2);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return run_cli(args);
      },
      py::arg("args"));
}
