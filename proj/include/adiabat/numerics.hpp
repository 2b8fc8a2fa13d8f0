#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "adiabat/errors.hpp"

namespace adiabat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Central-difference step used by derivative helpers unless overridden.
inline constexpr double kDefaultFdStep = 1e-6;

bool all_finite(const Matrix& a);
bool all_finite(const Vector& v);

// max |A_ij - conj(A_ji)| <= tol
bool is_hermitian(const Matrix& a, double tol);
double hermiticity_defect(const Matrix& a);

// Kronecker product, row-major index convention: (ij,kl) -> a(i,k) * b(j,l).
Matrix kron(const Matrix& a, const Matrix& b);

// (1/2) ||a - b||_1 after hermitizing the difference.
double trace_distance(const Matrix& a, const Matrix& b);

struct EigenPair {
  Complex value;
  Vector right;  // unit norm
};

// Full eigensystem of a general complex square matrix, sorted by
// (Re, Im) ascending. Residual contract: ||A r - lambda r|| <= 1e-10 ||A|| ||r||.
std::vector<EigenPair> eigensolve_general(const Matrix& a);

// Roots of c3 x^3 + c2 x^2 + c1 x + c0, via the companion-matrix eigensystem,
// sorted by (Re, Im) ascending. c3 == 0 is rejected.
std::array<Complex, 3> solve_cubic(Complex c3, Complex c2, Complex c1, Complex c0);

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = 0.5;
  double min_step = 1e-12;

  void validate() const;
};

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
};

// Adaptive embedded Dormand-Prince 5(4) over a complex vector field
// y' = f(t, y). The trajectory contains both endpoints; if sample_times is
// nonempty it must be increasing inside [t0, t1] and the output is stored at
// exactly {t0} + sample_times + {t1}. Step underflow raises StiffnessError.
OdeTrajectory integrate_ode(const std::function<Vector(double, const Vector&)>& f,
                            const Vector& y0, double t0, double t1,
                            const IntegratorConfig& cfg,
                            std::span<const double> sample_times = {});

// Central difference (g(t+h) - g(t-h)) / 2h for matrix- or vector-valued g.
template <typename F>
auto central_difference(F&& g, double t, double h = kDefaultFdStep) {
  if (!(h > 0.0)) throw ArgumentError("central_difference: h must be positive");
  auto plus = g(t + h);
  auto minus = g(t - h);
  return ((plus - minus) / (2.0 * h)).eval();
}

}  // namespace adiabat
