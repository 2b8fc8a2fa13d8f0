#pragma once

#include "adiabat/embed.hpp"
#include "adiabat/model.hpp"

namespace adiabat {

// Frame built from the instantaneous eigenbasis of the system Hamiltonian:
// U(t) maps instantaneous eigenvectors onto the fixed canonical basis, so the
// rotated Hamiltonian is the diagonal of instantaneous eigenvalues. Z(t) is
// the i dU/dt U' gauge operator from central differences of U on the grid
// (second-order one-sided at the endpoints), stored as computed.
struct RotatingFrame {
  std::vector<double> times;
  std::vector<Matrix> u;                 // unitary per grid point
  std::vector<Matrix> z;                 // raw finite-difference gauge operator
  std::vector<Eigen::VectorXd> energies; // tracked eigenvalues, ascending at t0

  size_t index_at(double t) const;
};

// Tracks the eigenbasis of H(t) across the grid with overlap matching and
// real-positive phase fixing seeded by the largest-component rule at the first
// point. An eigenvalue crossing (overlap collapse or gap collapse) raises
// DegeneracyError naming the interval.
RotatingFrame build_frame(const LindbladModel& model, std::vector<double> time_grid);

// Model for the rotated state: Hamiltonian schedule samples of
// diag(E_n(t)) + Z(t) (hermitized) and jump schedules U L U', both
// piecewise-linear on the frame grid.
LindbladModel rotate_model(const LindbladModel& model, const RotatingFrame& frame);

// Composite-system generator of the rotated master equation.
EffectiveHamiltonian build_rotated_effective(const LindbladModel& model,
                                             const RotatingFrame& frame, double t);

// Adiabaticity rate evaluated on the rotated generator's tracked eigensystem.
double high_order_gamma(const LindbladModel& model, const RotatingFrame& frame,
                        double t, int m, int n);

}  // namespace adiabat
