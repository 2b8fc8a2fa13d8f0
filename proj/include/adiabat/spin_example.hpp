#pragma once

#include "adiabat/adiabatic.hpp"
#include "adiabat/model.hpp"

namespace adiabat {

// Dissipative spin-1/2 in a rotating magnetic field, energy unit mu*B0 = 1,
// hbar = 1. gamma = kappa / (mu B0) is the scaled spontaneous-emission rate,
// omega the field rotation frequency, theta the polar angle of the field.
struct SpinParams {
  double gamma = 0.5;
  double omega = 0.1;
  double theta = 0.7853981633974483;  // pi/4
};

// N = 2 model in basis {g, e}: H(t) = B(t).sigma with
// B(t) = (sin(theta)cos(omega t), sin(theta)sin(omega t), cos(theta)),
// single jump operator sqrt(gamma) |g><e| (omitted when gamma = 0).
LindbladModel spin_model(const SpinParams& p);

// The composite-system generator in basis {gg, ge, eg, ee} as an explicit
// 4x4 matrix at azimuth phi.
Matrix spin_effective_closed_form(const SpinParams& p, double phi);

struct SpinEigenSystem {
  std::array<Complex, 4> eigenvalues;  // 0 first, cubic roots after, (Re, Im) sorted
  Matrix right;  // columns R_j
  Matrix left;   // rows: bra coefficients of <L_j|, <L_j|R_j> = 1
};

// Closed-form eigensystem. The nonzero eigenvalues are the roots of
//   mu^3 + (i gamma / 2) mu^2 - 4 mu - 2 i gamma cos^2(theta) = 0,
// shifted by lambda = mu - i gamma / 2. gamma = 0 is rejected (the zero
// eigenvalue becomes doubly degenerate); sin(theta) = 0 is rejected because
// the eigenvector component formulas divide by it.
SpinEigenSystem spin_eigen_closed_form(const SpinParams& p, double phi = 0.0);

// Gamma(gamma, omega) surface of the spin model (delegates to gamma_sweep).
SweepResult figure1_data(double theta, std::vector<double> gamma_grid,
                         std::vector<double> omega_grid);

}  // namespace adiabat
