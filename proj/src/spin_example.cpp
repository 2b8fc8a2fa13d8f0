#include "adiabat/spin_example.hpp"

#include <cmath>

namespace adiabat {

namespace {

void check_params(const SpinParams& p) {
  if (!std::isfinite(p.gamma) || !std::isfinite(p.omega) || !std::isfinite(p.theta))
    throw ArgumentError("spin model: parameters must be finite");
  if (p.gamma < 0.0) throw ArgumentError("spin model: gamma must be >= 0");
}

}  // namespace

LindbladModel spin_model(const SpinParams& p) {
  check_params(p);
  OperatorSchedule h = OperatorSchedule::builtin(
      "rotating_field_spin", {{"theta", p.theta}, {"omega", p.omega}});
  std::vector<OperatorSchedule> jumps;
  if (p.gamma > 0.0) {
    Matrix lower = Matrix::Zero(2, 2);
    lower(0, 1) = std::sqrt(p.gamma);  // sqrt(gamma) |g><e|
    jumps.push_back(OperatorSchedule::constant(std::move(lower)));
  }
  const double period = 2.0 * M_PI / std::max(std::abs(p.omega), 1e-3);
  return LindbladModel(2, std::move(h), std::move(jumps), {-period, 2.0 * period});
}

Matrix spin_effective_closed_form(const SpinParams& p, double phi) {
  check_params(p);
  const double s = std::sin(p.theta), c = std::cos(p.theta), g = p.gamma;
  const Complex ep = std::exp(kI * phi), em = std::exp(-kI * phi);
  Matrix ht(4, 4);
  ht << 0.0, -s * em, s * ep, kI * g,
      -s * ep, -2.0 * c - 0.5 * kI * g, 0.0, s * ep,
      s * em, 0.0, 2.0 * c - 0.5 * kI * g, -s * em,
      0.0, s * em, -s * ep, -kI * g;
  return ht;
}

SpinEigenSystem spin_eigen_closed_form(const SpinParams& p, double phi) {
  check_params(p);
  if (p.gamma == 0.0)
    throw DegeneracyError(
        "spin_eigen_closed_form: gamma = 0 makes the zero eigenvalue degenerate");
  const double s = std::sin(p.theta), c = std::cos(p.theta), g = p.gamma;
  if (std::abs(s) < 1e-12)
    throw DomainError(
        "spin_eigen_closed_form: the component formulas require sin(theta) != 0");

  SpinEigenSystem sys;
  sys.eigenvalues[0] = 0.0;
  const auto mu = solve_cubic(1.0, 0.5 * kI * g, -4.0, -2.0 * kI * g * c * c);
  for (int j = 0; j < 3; ++j)
    sys.eigenvalues[static_cast<size_t>(j + 1)] = mu[static_cast<size_t>(j)] - 0.5 * kI * g;

  sys.right.resize(4, 4);
  sys.left.resize(4, 4);
  const Complex ep = std::exp(kI * phi), em = std::exp(-kI * phi);
  const double denom_floor = 1e-12 * std::max(1.0, g + 2.0);

  // stationary mode
  Vector r1(4), l1(4);
  r1 << 1.0 + (4.0 * c * c + 0.25 * g * g) / (s * s),
      -(2.0 * c - 0.5 * kI * g) * ep / s,
      -(2.0 * c + 0.5 * kI * g) * em / s, 1.0;
  l1 << 1.0, 0.0, 0.0, 1.0;
  const Complex m1 = l1.cwiseProduct(r1).sum();
  if (std::abs(m1) < denom_floor)
    throw NumericError("spin_eigen_closed_form: vanishing normalization M_1");
  sys.right.col(0) = r1 / std::sqrt(m1);
  sys.left.row(0) = (l1 / std::sqrt(m1)).transpose();

  for (int j = 1; j < 4; ++j) {
    const Complex lam = sys.eigenvalues[static_cast<size_t>(j)];
    const Complex dplus = 2.0 * c + 0.5 * kI * g + lam;
    const Complex dminus = 2.0 * c - 0.5 * kI * g - lam;
    const Complex dg = kI * g + lam;
    if (std::abs(dminus) < denom_floor || std::abs(dplus) < denom_floor ||
        std::abs(dg) < denom_floor)
      throw NumericError(
          "spin_eigen_closed_form: eigenvector formula denominator vanishes at "
          "these parameters");
    Vector r(4), l(4);
    const Complex aj = -dplus;
    r << aj, 2.0 * s * ep, 2.0 * s * dplus * em / dminus, -aj;
    const Complex bigA = -(2.0 * c - 0.5 * kI * g + lam);
    const Complex bigD = (kI * g - lam) / dg * bigA;
    l << bigA, s * em * (bigD - bigA) / dplus, s * ep * (bigD - bigA) / dminus, bigD;
    const Complex mj = l.cwiseProduct(r).sum();
    if (std::abs(mj) < denom_floor)
      throw NumericError("spin_eigen_closed_form: vanishing normalization M_j");
    sys.right.col(j) = r / std::sqrt(mj);
    sys.left.row(j) = (l / std::sqrt(mj)).transpose();
  }
  return sys;
}

SweepResult figure1_data(double theta, std::vector<double> gamma_grid,
                         std::vector<double> omega_grid) {
  for (double g : gamma_grid)
    if (!(g > 0.0))
      throw ArgumentError("figure1_data: gamma grid must be strictly positive");
  return gamma_sweep(theta, std::move(gamma_grid), std::move(omega_grid), 0.0);
}

}  // namespace adiabat
