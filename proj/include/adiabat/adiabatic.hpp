#pragma once

#include <optional>
#include <ostream>
#include <utility>

#include "adiabat/spectral.hpp"

namespace adiabat {

enum class GammaForm {
  HtDerivative,     // |<L_n| dH_T/dt |R_m>| / |lambda_m - lambda_n|^2
  RightDerivative,  // |<L_n| dR_m/dt >| / |lambda_m - lambda_n|
};

// Adiabaticity-violation rate for one ordered mode pair, evaluated at time t
// on a tracked path. Values are defined under the canonical normalization
// (unit-norm right vectors, <L|R> = 1); inputs are re-canonicalized, so
// rescaling a stored decomposition does not change the result. Derivatives are
// taken by local central differences with step h. m == n is rejected;
// degenerate-flagged modes raise DegeneracyError.
double gamma_mn(const EigenPath& path, double t, int m, int n,
                GammaForm form = GammaForm::RightDerivative,
                double h = kDefaultFdStep);

// <L_n| dR_m/dt > evaluated as a trace of reshaped eigenvector matrices.
// Cross-checks the reshape bookkeeping; m == n is allowed.
Complex gamma_trace_form(const EigenPath& path, double t, int m, int n,
                         double h = kDefaultFdStep);

struct GammaMatrix {
  double time = 0.0;
  Eigen::MatrixXd entries;  // NaN on the diagonal and on excluded pairs
  std::vector<std::pair<int, int>> excluded_pairs;
};

GammaMatrix gamma_matrix(const EigenPath& path, double t,
                         GammaForm form = GammaForm::RightDerivative,
                         double h = kDefaultFdStep);

struct GammaMax {
  double value = 0.0;
  int m = -1;
  int n = -1;
};

// Maximum over non-excluded ordered pairs; DegeneracyError if none remain.
GammaMax gamma_max(const EigenPath& path, double t,
                   GammaForm form = GammaForm::RightDerivative,
                   double h = kDefaultFdStep);

struct SweepPoint {
  double gamma = 0.0;
  double omega = 0.0;
  double value = 0.0;  // NaN when excluded
  int m = -1;
  int n = -1;
  bool excluded = false;
};

struct SweepResult {
  double theta = 0.0;
  double t_eval = 0.0;
  std::vector<double> gamma_grid;
  std::vector<double> omega_grid;
  std::vector<SweepPoint> points;  // ordered by (gamma index, omega index)

  const SweepPoint& at(size_t gamma_idx, size_t omega_idx) const {
    return points.at(gamma_idx * omega_grid.size() + omega_idx);
  }
};

// Gamma(gamma, omega) surface for the rotating-field spin model. Grid points
// run concurrently (worker count from ADIABAT_THREADS, else hardware); results
// are stored by grid index so the output is deterministic. Points with a
// degenerate-flagged spectrum (e.g. gamma = 0) are recorded as exclusions.
SweepResult gamma_sweep(double theta, std::vector<double> gamma_grid,
                        std::vector<double> omega_grid, double t_eval = 0.0);

// CSV emission: header gamma,omega,Gamma,arg_m,arg_n,excluded with 17
// significant digits.
void write_sweep_csv(const SweepResult& result, std::ostream& out);

struct AdiabaticTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;  // composite pure-state embeddings
};

// Transitionless propagation: each coefficient evolves as
// c_m(t) = c_m(t0) exp(-int <L_m|dR_m/dt>) and the state is reassembled with
// the accumulated dynamical phases (trapezoid integrals on the path grid).
// t0 and t1 must be grid points of the path.
AdiabaticTrajectory adiabatic_propagate(const EigenPath& path, const Vector& psi0,
                                        double t0, double t1);

// Exact coefficient dynamics including the off-diagonal coupling term,
// integrated on the path grid; recovers the exact embedded evolution up to
// grid resolution. Used as the soundness oracle for the adiabatic split.
AdiabaticTrajectory coefficient_propagate_exact(const EigenPath& path,
                                                const Vector& psi0, double t0,
                                                double t1);

struct AdiabaticErrorReport {
  double trace_distance = 0.0;
  std::vector<double> times;
  Eigen::MatrixXd exact_mode_amps;      // |<L_m|Psi_exact>| per (time, mode)
  Eigen::MatrixXd adiabatic_mode_amps;  // same for the adiabatic state
};

// Propagates the embedded equation exactly and adiabatically from the same
// state and reports the trace distance at t1 plus mode-amplitude histories.
AdiabaticErrorReport adiabatic_error(const LindbladModel& model,
                                     const DensityMatrix& rho0, double t1,
                                     int grid_points,
                                     const IntegratorConfig& cfg = {});

}  // namespace adiabat
