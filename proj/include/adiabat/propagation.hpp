#pragma once

#include <cstdint>
#include <ostream>

#include "adiabat/embed.hpp"
#include "adiabat/model.hpp"

namespace adiabat {

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;  // density matrices at the stored times
  IntegratorConfig config;
  std::uint64_t model_hash = 0;

  // Spec'd state-quality checks (trace drift, tolerance-positivity).
  void validate(double trace_tol = 1e-8, double eig_floor = -1e-6) const;
};

// FNV-1a over the canonical JSON serialization.
std::uint64_t model_hash(const LindbladModel& model);

// Integrates d(rho)/dt = -i L(t) rho directly in density-matrix form,
// storing n_samples + 1 uniform snapshots including both endpoints.
Trajectory propagate_master(const LindbladModel& model, const DensityMatrix& rho0,
                            double t0, double t1, const IntegratorConfig& cfg = {},
                            int n_samples = 200);

// Integrates the embedded equation i d|Psi>/dt = H_T(t)|Psi> and extracts the
// density matrix at the stored times. H_T is rebuilt from the schedules at
// every evaluation.
Trajectory propagate_embedded(const LindbladModel& model, const DensityMatrix& rho0,
                              double t0, double t1, const IntegratorConfig& cfg = {},
                              int n_samples = 200);

struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> distances;
  double max_distance = 0.0;
  double at_time = 0.0;
  bool resampled = false;
};

// Per-time trace distances over the common time window; the sparser grid is
// compared against linear interpolation of the other when grids differ
// (flagged via `resampled`). Disjoint windows raise DomainError.
ComparisonReport compare_trajectories(const Trajectory& a, const Trajectory& b);

// CSV schema: time, then Re/Im of every density-matrix entry in row-major
// order, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out,
                          const std::string& label = "");

}  // namespace adiabat
