#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adiabat/adiabatic.hpp"
#include "adiabat/propagation.hpp"
#include "adiabat/rotated.hpp"
#include "adiabat/selftest.hpp"
#include "adiabat/spin_example.hpp"
#include "adiabat/version.hpp"

namespace py = pybind11;
using namespace adiabat;

namespace {

std::pair<std::vector<double>, std::vector<Matrix>> run_propagator(
    const LindbladModel& model, const Matrix& rho0, double t0, double t1,
    int n_samples, double rel_tol, double abs_tol, bool embedded) {
  IntegratorConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  const DensityMatrix state(rho0);
  const Trajectory traj = embedded
                              ? propagate_embedded(model, state, t0, t1, cfg, n_samples)
                              : propagate_master(model, state, t0, t1, cfg, n_samples);
  return {traj.times, traj.states};
}

}  // namespace

PYBIND11_MODULE(_adiabat, m) {
  m.doc() = "Open-system dynamics via a composite-system effective Hamiltonian";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "AdiabatError");

  py::class_<LindbladModel>(m, "LindbladModel")
      .def_property_readonly("dim", &LindbladModel::dim)
      .def("hamiltonian", &LindbladModel::hamiltonian, py::arg("t"))
      .def("to_json", [](const LindbladModel& model) { return model_to_json(model); })
      .def("__repr__", [](const LindbladModel& model) {
        return "<LindbladModel dim=" + std::to_string(model.dim()) + " jumps=" +
               std::to_string(model.n_jumps()) + ">";
      });

  m.def("model_from_json", &model_from_json, py::arg("text"));
  m.def("model_from_json_file", &model_from_json_file, py::arg("path"));
  m.def(
      "spin_model",
      [](double gamma, double omega, double theta) {
        return spin_model(SpinParams{gamma, omega, theta});
      },
      py::arg("gamma"), py::arg("omega"), py::arg("theta"));

  m.def(
      "validate_model",
      [](const LindbladModel& model, int n_samples) {
        const ValidationReport rep = validate_model(model, n_samples);
        return py::make_tuple(rep.passed, rep.max_hermiticity_violation, rep.failures);
      },
      py::arg("model"), py::arg("n_samples") = 16);

  m.def("liouvillian_apply", &liouvillian_apply, py::arg("model"), py::arg("t"),
        py::arg("rho"));
  m.def(
      "build_effective_hamiltonian",
      [](const LindbladModel& model, double t) {
        return build_effective_hamiltonian(model, t).matrix;
      },
      py::arg("model"), py::arg("t"));
  m.def("build_liouvillian_superoperator", &build_liouvillian_superoperator,
        py::arg("model"), py::arg("t"));
  m.def("embed_density",
        static_cast<Vector (*)(const Matrix&)>(&embed_density), py::arg("rho"));
  m.def("extract_density", &extract_density, py::arg("psi"));
  m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));

  m.def(
      "decompose",
      [](const Matrix& ht, double rel_tol) {
        const SpectralDecomposition d = decompose(ht, rel_tol);
        Matrix rights(d.dim, d.dim), lefts(d.dim, d.dim);
        for (int j = 0; j < d.dim; ++j) {
          rights.col(j) = d.right[static_cast<size_t>(j)];
          lefts.row(j) = d.left[static_cast<size_t>(j)].transpose();
        }
        return py::make_tuple(d.eigenvalues, rights, lefts, d.degenerate);
      },
      py::arg("matrix"), py::arg("degeneracy_rel_tol") = kDefaultDegeneracyRel,
      "Returns (eigenvalues, right columns, left bra-coefficient rows, "
      "degenerate flags)");

  m.def(
      "gamma_max_spin",
      [](double gamma, double omega, double theta, double t) {
        EigenPath path = track_paths(spin_model(SpinParams{gamma, omega, theta}),
                                     {t, t + 0.01});
        const GammaMax g = gamma_max(path, t);
        return py::make_tuple(g.value, g.m, g.n);
      },
      py::arg("gamma"), py::arg("omega"), py::arg("theta"), py::arg("t") = 0.0);

  m.def(
      "gamma_sweep",
      [](double theta, std::vector<double> gamma_grid, std::vector<double> omega_grid,
         double t_eval) {
        const SweepResult r =
            gamma_sweep(theta, std::move(gamma_grid), std::move(omega_grid), t_eval);
        py::list rows;
        for (const auto& p : r.points)
          rows.append(py::make_tuple(p.gamma, p.omega, p.value, p.m, p.n, p.excluded));
        return rows;
      },
      py::arg("theta"), py::arg("gamma_grid"), py::arg("omega_grid"),
      py::arg("t_eval") = 0.0,
      "Rows of (gamma, omega, Gamma, arg_m, arg_n, excluded)");

  m.def(
      "propagate_master",
      [](const LindbladModel& model, const Matrix& rho0, double t0, double t1,
         int n_samples, double rel_tol, double abs_tol) {
        return run_propagator(model, rho0, t0, t1, n_samples, rel_tol, abs_tol, false);
      },
      py::arg("model"), py::arg("rho0"), py::arg("t0"), py::arg("t1"),
      py::arg("n_samples") = 200, py::arg("rel_tol") = 1e-9,
      py::arg("abs_tol") = 1e-11);
  m.def(
      "propagate_embedded",
      [](const LindbladModel& model, const Matrix& rho0, double t0, double t1,
         int n_samples, double rel_tol, double abs_tol) {
        return run_propagator(model, rho0, t0, t1, n_samples, rel_tol, abs_tol, true);
      },
      py::arg("model"), py::arg("rho0"), py::arg("t0"), py::arg("t1"),
      py::arg("n_samples") = 200, py::arg("rel_tol") = 1e-9,
      py::arg("abs_tol") = 1e-11);

  m.def(
      "adiabatic_error_spin",
      [](double gamma, double omega, double theta, double t1, int grid_points) {
        const LindbladModel model = spin_model(SpinParams{gamma, omega, theta});
        Matrix rho0 = Matrix::Zero(2, 2);
        rho0(1, 1) = 1.0;
        const AdiabaticErrorReport rep =
            adiabatic_error(model, DensityMatrix(rho0), t1, grid_points);
        return py::make_tuple(rep.trace_distance, rep.times, rep.exact_mode_amps,
                              rep.adiabatic_mode_amps);
      },
      py::arg("gamma"), py::arg("omega"), py::arg("theta"), py::arg("t1"),
      py::arg("grid_points") = 1201);

  m.def(
      "run_selftest",
      [](std::uint64_t seed, bool quick) {
        SelftestOptions opts;
        opts.seed = seed;
        opts.quick = quick;
        const SelftestReport rep = run_selftest(opts);
        py::list suites;
        for (const auto& s : rep.suites)
          suites.append(py::make_tuple(s.name, s.passed, s.detail));
        return suites;
      },
      py::arg("seed") = 20240915, py::arg("quick") = true);
}
