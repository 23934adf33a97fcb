#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "openhall/errors.hpp"
#include "openhall/oracle.hpp"
#include "openhall/response.hpp"
#include "openhall/suite.hpp"

namespace py = pybind11;
using namespace openhall;

namespace {

Momentum momentum(std::pair<double, double> k) { return {k.first, k.second}; }

BZGrid default_grid(const Model& m, int resolution, bool hall_zone) {
  return BZGrid::for_domain(hall_zone ? hall_domain(m) : model_domain(m), resolution);
}

IntegrationOptions options(double tol, int max_levels, int threads) {
  IntegrationOptions o;
  o.tol = tol;
  o.max_levels = max_levels;
  o.threads = threads;
  return o;
}

py::dict breakdown(const ConductivityBreakdown& b) {
  py::dict d;
  d["sigma0"] = b.sigma0;
  d["dsigma1"] = b.dsigma1;
  d["dsigma2"] = b.dsigma2;
  d["total"] = b.total;
  d["chern_rate"] = b.chern_rate;
  d["error_estimate"] = b.error_estimate;
  d["levels"] = b.levels;
  d["excluded"] = b.excluded;
  d["converged"] = b.converged;
  d["grid"] = b.grid;
  d["method"] = b.method;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hall conductivity of Lindblad steady states";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DegeneratePoint>(m, "DegeneratePoint", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<NonlinearResponse>(m, "NonlinearResponse", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<ResolutionError>(m, "ResolutionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<TwoBandModel>(m, "TwoBandModel")
      .def_readonly("name", &TwoBandModel::name)
      .def_readonly("params", &TwoBandModel::params)
      .def("d", [](const TwoBandModel& t, std::pair<double, double> k) {
        const DVector d = t.d_at(momentum(k));
        return std::array<double, 3>{d.x, d.y, d.z};
      });
  py::class_<BandModel>(m, "BandModel")
      .def_readonly("name", &BandModel::name)
      .def_readonly("dim", &BandModel::dim);

  m.def("rashba_dresselhaus", &rashba_dresselhaus, py::arg("lam"), py::arg("beta"), py::arg("h0"));
  m.def("bi2se3_valley", &bi2se3_valley, py::arg("vF"), py::arg("delta0"), py::arg("B"));
  m.def("magnetic_lattice", &magnetic_lattice, py::arg("ta"), py::arg("delta"), py::arg("p"), py::arg("q"),
        py::arg("l"), py::arg("m"));
  m.def("qwz_lattice", &qwz_lattice, py::arg("mass"));
  m.def("spin_one_lift", &spin_one_lift);

  m.def(
      "hamiltonian", [](const Model& model, std::pair<double, double> k) { return hamiltonian_at(model, momentum(k)).matrix(); },
      py::arg("model"), py::arg("k"));
  m.def(
      "eigensystem",
      [](const Model& model, std::pair<double, double> k) {
        const Eigensystem es = hermitian_eigensystem(hamiltonian_at(model, momentum(k)));
        return std::make_pair(RVector(es.values), CMatrix(es.vectors));
      },
      py::arg("model"), py::arg("k"));

  py::class_<DissipatorSpec>(m, "DissipatorSpec").def_property_readonly("name", &DissipatorSpec::name);
  m.def("spin_lowering", &spin_lowering, py::arg("gamma"));
  m.def("single_steady_band", &single_steady_band, py::arg("target"), py::arg("rates"));
  m.def("two_steady_bands", &two_steady_bands, py::arg("s1"), py::arg("s2"), py::arg("rates1"), py::arg("rates2"),
        py::arg("w1") = 0.5, py::arg("w2") = 0.5);

  m.def(
      "steady_state",
      [](const Model& model, const DissipatorSpec& spec, std::pair<double, double> k, double Ex, bool general) {
        const SteadyStateK s = steady_state_at(model, spec, momentum(k), {Ex},
                                               general ? FirstOrderMethod::General : FirstOrderMethod::ClosedForm);
        return std::make_pair(s.order0, s.order1);
      },
      py::arg("model"), py::arg("spec"), py::arg("k"), py::arg("Ex") = 1.0, py::arg("general") = false,
      "(order0, order1) in the ascending band basis");
  m.def(
      "oracle_response",
      [](const Model& model, const DissipatorSpec& spec, std::pair<double, double> k) {
        const ResponseProbe p = probe_response(model, spec, band_frame(model, momentum(k)));
        return std::make_tuple(p.rho0, p.rho1, p.exponent);
      },
      py::arg("model"), py::arg("spec"), py::arg("k"), "(rho0, rho1 per unit field, remainder exponent)");

  m.def(
      "hall_conductivity",
      [](const Model& model, const DissipatorSpec& spec, double Ex, int resolution, double tol, int max_levels,
         int threads) {
        return breakdown(hall_conductivity_general(model, spec, {Ex}, default_grid(model, resolution, true),
                                                   options(tol, max_levels, threads)));
      },
      py::arg("model"), py::arg("spec"), py::arg("Ex") = 1.0, py::arg("resolution") = 64, py::arg("tol") = 1e-5,
      py::arg("max_levels") = 5, py::arg("threads") = 1);
  m.def(
      "hall_two_band_spin",
      [](const TwoBandModel& model, double gamma, int resolution, double tol, int max_levels, int threads) {
        return breakdown(hall_two_band_spin(model, gamma, default_grid(model, resolution, true),
                                            options(tol, max_levels, threads)));
      },
      py::arg("model"), py::arg("gamma"), py::arg("resolution") = 64, py::arg("tol") = 1e-5,
      py::arg("max_levels") = 5, py::arg("threads") = 1);
  m.def(
      "chern_number",
      [](const Model& model, int band, int resolution) {
        const ChernResult c = chern_number(model, band, resolution);
        py::dict d;
        d["chern"] = c.chern;
        d["raw"] = c.raw;
        d["residual"] = c.residual;
        d["max_plaquette"] = c.max_plaquette;
        d["grid"] = c.grid;
        return d;
      },
      py::arg("model"), py::arg("band"), py::arg("resolution") = 64);
  m.def("bi2se3_analytic", &bi2se3_analytic, py::arg("B"), py::arg("delta0"));

  m.def(
      "validate",
      [](std::uint64_t seed, int points, double gamma, bool flip_s3) {
        SuiteOptions o{seed, points, gamma, flip_s3};
        SuiteReport r = run_oracle_ladder(o);
        for (auto& c : run_invariants(o).checks) r.checks.push_back(std::move(c));
        py::list out;
        for (const auto& c : r.checks) out.append(py::make_tuple(c.name, c.pass, c.worst, c.threshold));
        return out;
      },
      py::arg("seed") = 42, py::arg("points") = 20, py::arg("gamma") = 0.1, py::arg("flip_s3") = false,
      "list of (check, pass, worst, threshold)");
}
