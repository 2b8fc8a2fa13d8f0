#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "adiabat/embed.hpp"
#include "adiabat/numerics.hpp"
#include "adiabat/selftest.hpp"
#include "adiabat/spin_example.hpp"
#include "support/test_helpers.hpp"

using namespace adiabat;

TEST_CASE("eigensolve: identity and diagonal matrices") {
  auto pairs = eigensolve_general(Matrix::Identity(2, 2));
  CHECK(pairs.size() == 2);
  CHECK(std::abs(pairs[0].value - 1.0) < 1e-14);
  CHECK(std::abs(pairs[1].value - 1.0) < 1e-14);

  const double theta = M_PI / 4, g = 0.5;
  Matrix d = Matrix::Zero(4, 4);
  d(0, 0) = 0.0;
  d(1, 1) = Complex(-2 * std::cos(theta), -0.5 * g);
  d(2, 2) = Complex(2 * std::cos(theta), -0.5 * g);
  d(3, 3) = Complex(0.0, -g);
  auto dp = eigensolve_general(d);
  std::vector<Complex> got, want;
  for (const auto& p : dp) got.push_back(p.value);
  for (int i = 0; i < 4; ++i) want.push_back(d(i, i));
  CHECK(testing::multiset_distance(got, want) < 1e-14);
}

TEST_CASE("eigensolve: rotating-spin generator eigenvalues satisfy the cubic") {
  const double g = 0.5, theta = M_PI / 4;
  const Matrix ht = spin_effective_closed_form({g, 0.1, theta}, 0.0);
  auto pairs = eigensolve_general(ht);
  bool has_zero = false;
  for (const auto& p : pairs) {
    if (std::abs(p.value) < 1e-10) {
      has_zero = true;
      continue;
    }
    const Complex mu = p.value + 0.5 * kI * g;
    const Complex resid = mu * mu * mu + 0.5 * kI * g * mu * mu - 4.0 * mu -
                          2.0 * kI * g * std::cos(theta) * std::cos(theta);
    CHECK(std::abs(resid) < 1e-10);
  }
  CHECK(has_zero);
}

TEST_CASE("eigensolve: error paths") {
  CHECK_THROWS_AS(eigensolve_general(Matrix::Zero(3, 2)), DimensionError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eigensolve_general(bad), NumericError);
}

TEST_CASE("eigensolve: residual and trace properties on random dense matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 35);
    const Matrix a = testing::random_matrix(rng, n);
    auto pairs = eigensolve_general(a);
    Complex sum = 0.0;
    for (const auto& p : pairs) {
      CHECK((a * p.right - p.value * p.right).norm() <= 1e-10 * a.norm());
      CHECK(std::abs(p.right.norm() - 1.0) < 1e-12);
      sum += p.value;
    }
    CHECK(std::abs(sum - a.trace()) <= 1e-10 * a.norm());
  }
}

TEST_CASE("solve_cubic: spin cubic at gamma = 0 and perfect cube") {
  auto roots = solve_cubic(1.0, 0.0, -4.0, 0.0);  // mu^3 - 4 mu
  CHECK(std::abs(roots[0] - Complex(-2.0)) < 1e-12);
  CHECK(std::abs(roots[1] - Complex(0.0)) < 1e-12);
  CHECK(std::abs(roots[2] - Complex(2.0)) < 1e-12);

  // (x - 1)^3: values near a triple root are ill-conditioned but residuals stay tiny
  auto triple = solve_cubic(1.0, -3.0, 3.0, -1.0);
  for (const auto& r : triple) {
    CHECK(std::abs(r - 1.0) < 1e-4);
    CHECK(std::abs(r * r * r - 3.0 * r * r + 3.0 * r - 1.0) < 1e-12 * 3.0);
  }
}

TEST_CASE("solve_cubic: Vieta sum for the spin cubic at gamma = 1") {
  const double g = 1.0, theta = M_PI / 4;
  auto roots = solve_cubic(1.0, 0.5 * kI * g, -4.0,
                           -2.0 * kI * g * std::cos(theta) * std::cos(theta));
  const Complex sum = roots[0] + roots[1] + roots[2];
  CHECK(std::abs(sum - Complex(0.0, -0.5)) < 1e-12);
}

TEST_CASE("solve_cubic: degenerate degree and reconstruction property") {
  CHECK_THROWS_AS(solve_cubic(0.0, 1.0, 1.0, 1.0), DimensionError);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const Complex c3(nd(rng) + 1.5, nd(rng));
    const Complex c2(nd(rng), nd(rng)), c1(nd(rng), nd(rng)), c0(nd(rng), nd(rng));
    auto r = solve_cubic(c3, c2, c1, c0);
    // expand c3 (x - r0)(x - r1)(x - r2)
    const Complex e2 = -(r[0] + r[1] + r[2]) * c3;
    const Complex e1 = (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]) * c3;
    const Complex e0 = -(r[0] * r[1] * r[2]) * c3;
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    CHECK(std::abs(e2 - c2) <= 1e-10 * scale);
    CHECK(std::abs(e1 - c1) <= 1e-10 * scale);
    CHECK(std::abs(e0 - c0) <= 1e-10 * scale);
  }
}

TEST_CASE("integrate_ode: analytic exponential and null field") {
  IntegratorConfig cfg;
  auto f = [](double, const Vector& y) { return (-kI * y).eval(); };
  Vector y0(1);
  y0 << 1.0;
  auto traj = integrate_ode(f, y0, 0.0, M_PI, cfg);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == M_PI);
  CHECK(std::abs(traj.states.back()(0) - Complex(-1.0)) < 1e-8);

  auto zero = [](double, const Vector& y) { return (0.0 * y).eval(); };
  auto flat = integrate_ode(zero, y0, 0.0, 5.0, cfg);
  for (const auto& s : flat.states) CHECK(std::abs(s(0) - 1.0) == 0.0);
}

TEST_CASE("integrate_ode: closed-system purity conservation") {
  const LindbladModel model = spin_model({0.0, 0.0, 0.9});
  Matrix rho0(2, 2);
  rho0 << 0.25, Complex(0.2, 0.1), Complex(0.2, -0.1), 0.75;
  auto f = [&](double t, const Vector& y) {
    return embed_density((-kI * liouvillian_apply(model, t, extract_density(y))).eval());
  };
  IntegratorConfig cfg;
  auto traj = integrate_ode(f, embed_density(rho0), 0.0, 8.0, cfg);
  const double purity0 = extract_density(traj.states.front()).squaredNorm();
  for (const auto& y : traj.states) {
    const Matrix rho = extract_density(y);
    CHECK(std::abs((rho * rho).trace().real() - purity0) < 1e-8);
  }
}

TEST_CASE("integrate_ode: halving tolerances improves the endpoint") {
  auto f = [](double, const Vector& y) { return (-kI * y).eval(); };
  Vector y0(1);
  y0 << 1.0;
  double errs[2];
  for (int k = 0; k < 2; ++k) {
    IntegratorConfig cfg;
    cfg.rel_tol = k == 0 ? 1e-5 : 0.5e-5;
    cfg.abs_tol = k == 0 ? 1e-7 : 0.5e-7;
    cfg.max_step = 100.0;  // leave the controller tolerance-limited
    auto traj = integrate_ode(f, y0, 0.0, 200.0, cfg);
    errs[k] = std::abs(traj.states.back()(0) - std::exp(Complex(0.0, -200.0)));
  }
  CHECK(errs[1] * 2.0 <= errs[0]);
}

TEST_CASE("integrate_ode: stiffness error carries the failing time") {
  // fast relaxation with a floor on the step size forces underflow
  auto f = [](double, const Vector& y) { return (-1e9 * y).eval(); };
  Vector y0(1);
  y0 << 1.0;
  IntegratorConfig cfg;
  cfg.min_step = 1e-4;
  cfg.max_step = 1.0;
  try {
    integrate_ode(f, y0, 0.0, 1.0, cfg);
    FAIL("expected StiffnessError");
  } catch (const StiffnessError& e) {
    CHECK(e.time >= 0.0);
    CHECK(e.time <= 1.0);
  }
}

TEST_CASE("central_difference: constant, exponential, polynomial") {
  Matrix m = testing::pauli_x();
  auto constant = [&](double) { return m; };
  CHECK(central_difference(constant, 0.3).cwiseAbs().maxCoeff() == 0.0);

  const double omega = 0.7;
  auto rot = [&](double t) { return (std::exp(kI * omega * t) * m).eval(); };
  const Matrix d = central_difference(rot, 0.0, 1e-6);
  CHECK((d - kI * omega * m).cwiseAbs().maxCoeff() < 1e-10);

  auto sq = [](double t) {
    Matrix v(1, 1);
    v(0, 0) = t * t;
    return v;
  };
  CHECK(std::abs(central_difference(sq, 1.0, 1e-4)(0, 0) - 2.0) < 1e-7);
}

TEST_CASE("trace_distance basics") {
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  CHECK(trace_distance(a, a) == 0.0);
  CHECK(std::abs(trace_distance(a, b) - 1.0) < 1e-14);
}
