#include "adiabat/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace adiabat {

bool all_finite(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  return true;
}

double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return hermiticity_defect(a) <= tol;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("trace_distance: shape mismatch");
  const Matrix d = a - b;
  const Matrix h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<EigenPair> eigensolve_general(const Matrix& a) {
  if (a.rows() != a.cols())
    throw DimensionError("eigensolve_general: matrix must be square");
  if (!all_finite(a))
    throw NumericError("eigensolve_general: non-finite entries");

  const Eigen::Index n = a.rows();
  Eigen::ComplexEigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigensolve_general: eigensolver did not converge");

  std::vector<EigenPair> pairs(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    pairs[static_cast<size_t>(i)].value = solver.eigenvalues()(i);
    Vector r = solver.eigenvectors().col(i);
    pairs[static_cast<size_t>(i)].right = r / r.norm();
  }
  std::sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) {
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });

  const double scale = a.norm();
  for (const auto& p : pairs) {
    const double resid = (a * p.right - p.value * p.right).norm();
    if (resid > 1e-10 * std::max(scale, 1e-300))
      throw NumericError("eigensolve_general: residual exceeds 1e-10 * ||A||");
  }
  return pairs;
}

std::array<Complex, 3> solve_cubic(Complex c3, Complex c2, Complex c1, Complex c0) {
  if (c3 == Complex(0.0, 0.0))
    throw DimensionError("solve_cubic: leading coefficient is zero");
  // Companion matrix of the monic cubic x^3 + a2 x^2 + a1 x + a0.
  const Complex a2 = c2 / c3, a1 = c1 / c3, a0 = c0 / c3;
  Matrix comp = Matrix::Zero(3, 3);
  comp(0, 2) = -a0;
  comp(1, 0) = 1.0;
  comp(1, 2) = -a1;
  comp(2, 1) = 1.0;
  comp(2, 2) = -a2;
  auto pairs = eigensolve_general(comp);
  return {pairs[0].value, pairs[1].value, pairs[2].value};
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw ArgumentError("IntegratorConfig: tolerances must be positive");
  if (!(min_step > 0.0) || !(min_step <= max_step))
    throw ArgumentError("IntegratorConfig: require 0 < min_step <= max_step");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784,  11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,  7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

double error_norm(const Vector& err, const Vector& y0, const Vector& y1,
                  double rel, double abs) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = abs + rel * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double e = std::abs(err(i)) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace

OdeTrajectory integrate_ode(const std::function<Vector(double, const Vector&)>& f,
                            const Vector& y0, double t0, double t1,
                            const IntegratorConfig& cfg,
                            std::span<const double> sample_times) {
  cfg.validate();
  if (!(t1 > t0)) throw ArgumentError("integrate_ode: require t1 > t0");
  if (!all_finite(y0)) throw NumericError("integrate_ode: non-finite initial state");

  std::vector<double> stops;
  stops.push_back(t0);
  for (double s : sample_times) {
    if (s < t0 || s > t1)
      throw ArgumentError("integrate_ode: sample time outside [t0, t1]");
    if (s > stops.back()) stops.push_back(s);
  }
  if (stops.back() < t1) stops.push_back(t1);

  OdeTrajectory traj;
  traj.times.reserve(stops.size());
  traj.states.reserve(stops.size());
  traj.times.push_back(t0);
  traj.states.push_back(y0);

  double t = t0;
  Vector y = y0;
  Vector k[7];
  k[0] = f(t, y);
  double h = std::min(cfg.max_step, (t1 - t0) / 10.0);
  h = std::max(h, cfg.min_step);

  for (size_t stop = 1; stop < stops.size(); ++stop) {
    const double target = stops[stop];
    while (t < target) {
      const bool clipped = t + h >= target;
      const double hs = clipped ? target - t : h;
      // stages (k[0] carried over, first-same-as-last)
      Vector ytmp;
      for (int s = 1; s < 7; ++s) {
        ytmp = y;
        for (int j = 0; j < s; ++j) ytmp += hs * kA[s][j] * k[j];
        k[s] = f(t + kC[s] * hs, ytmp);
      }
      Vector y5 = y;
      Vector y4 = y;
      for (int s = 0; s < 7; ++s) {
        if (kB5[s] != 0.0) y5 += hs * kB5[s] * k[s];
        if (kB4[s] != 0.0) y4 += hs * kB4[s] * k[s];
      }
      const double err = error_norm(y5 - y4, y, y5, cfg.rel_tol, cfg.abs_tol);
      if (err <= 1.0) {
        t = clipped ? target : t + hs;
        y = std::move(y5);
        k[0] = k[6];  // FSAL
        if (!clipped) {
          const double factor =
              std::clamp(err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0, 0.2, 5.0);
          h = std::clamp(hs * factor, cfg.min_step, cfg.max_step);
        }
      } else {
        const double factor = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        h = hs * factor;
        if (h < cfg.min_step)
          throw StiffnessError("integrate_ode: step size underflow at t=" +
                                   std::to_string(t),
                               t);
      }
      if (!all_finite(y))
        throw NumericError("integrate_ode: state became non-finite near t=" +
                           std::to_string(t));
    }
    traj.times.push_back(target);
    traj.states.push_back(y);
  }
  return traj;
}

}  // namespace adiabat
