#include "adiabat/selftest.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "adiabat/adiabatic.hpp"
#include "adiabat/embed.hpp"
#include "adiabat/spectral.hpp"
#include "adiabat/spin_example.hpp"

namespace adiabat {

namespace testing {

Matrix random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  return m;
}

Matrix random_hermitian(std::mt19937_64& rng, int n, double scale) {
  const Matrix m = random_matrix(rng, n, scale);
  return 0.5 * (m + m.adjoint());
}

DensityMatrix random_density(std::mt19937_64& rng, int n) {
  const Matrix g = random_matrix(rng, n, 1.0);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityMatrix(std::move(rho));
}

LindbladModel random_model(std::mt19937_64& rng, int dim, int n_jumps) {
  OperatorSchedule h = OperatorSchedule::constant(random_hermitian(rng, dim));
  std::vector<OperatorSchedule> jumps;
  for (int k = 0; k < n_jumps; ++k)
    jumps.push_back(OperatorSchedule::constant(random_matrix(rng, dim, 0.5)));
  return LindbladModel(dim, std::move(h), std::move(jumps), {0.0, 10.0});
}

}  // namespace testing

namespace {

using testing::random_matrix;
using testing::random_model;

SuiteResult suite_oracle_equivalence(std::mt19937_64& rng, int n_models,
                                     bool inject_fault) {
  SuiteResult result{"oracle_equivalence", true, ""};
  double worst = 0.0;
  std::uniform_int_distribution<int> dim_dist(2, 6);
  std::uniform_int_distribution<int> jump_dist(0, 3);
  std::uniform_real_distribution<double> t_dist(0.0, 10.0);
  for (int i = 0; i < n_models; ++i) {
    const LindbladModel model = random_model(rng, dim_dist(rng), jump_dist(rng));
    const double t = t_dist(rng);
    const Matrix ht = detail::effective_matrix(model, t, inject_fault ? -1.0 : 1.0);
    const Matrix oracle = build_liouvillian_superoperator(model, t);
    const double scale = std::max(1.0, oracle.cwiseAbs().maxCoeff());
    worst = std::max(worst, (ht - oracle).cwiseAbs().maxCoeff() / scale);
  }
  std::ostringstream ss;
  ss << "max entrywise deviation " << worst << " over " << n_models << " models";
  result.detail = ss.str();
  result.passed = worst <= 1e-12;
  return result;
}

SuiteResult suite_biorthonormality(std::mt19937_64& rng, int n_matrices) {
  SuiteResult result{"biorthonormality", true, ""};
  double worst_off = 0.0, worst_complete = 0.0, worst_recon = 0.0;
  std::uniform_int_distribution<int> dim_dist(2, 12);
  for (int i = 0; i < n_matrices; ++i) {
    const int n = dim_dist(rng);
    const Matrix a = random_matrix(rng, n);
    SpectralDecomposition d;
    try {
      d = decompose(a);
    } catch (const NonDiagonalizableError&) {
      continue;  // random matrices are almost surely fine; skip the exception set
    }
    Matrix overlap(n, n), completeness = Matrix::Zero(n, n), recon = Matrix::Zero(n, n);
    for (int m = 0; m < n; ++m) {
      for (int k = 0; k < n; ++k)
        overlap(m, k) = d.left_apply(m, d.right[static_cast<size_t>(k)]);
      completeness += d.right[static_cast<size_t>(m)] *
                      d.left[static_cast<size_t>(m)].transpose();
      recon += d.eigenvalues[static_cast<size_t>(m)] *
               d.right[static_cast<size_t>(m)] *
               d.left[static_cast<size_t>(m)].transpose();
    }
    worst_off = std::max(worst_off,
                         (overlap - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
    worst_complete = std::max(
        worst_complete, (completeness - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
    worst_recon = std::max(worst_recon, (recon - a).cwiseAbs().maxCoeff() / a.norm());
  }
  std::ostringstream ss;
  ss << "biorth " << worst_off << ", completeness " << worst_complete
     << ", reconstruction " << worst_recon;
  result.detail = ss.str();
  result.passed = worst_off <= 1e-10 && worst_complete <= 1e-9 && worst_recon <= 1e-9;
  return result;
}

SuiteResult suite_gamma_forms(std::mt19937_64& rng, int n_points) {
  SuiteResult result{"gamma_form_agreement", true, ""};
  double worst = 0.0;
  std::uniform_real_distribution<double> gamma_dist(0.2, 3.0);
  std::uniform_real_distribution<double> omega_dist(0.02, 1.0);
  std::uniform_real_distribution<double> theta_dist(0.3, M_PI - 0.3);
  std::uniform_real_distribution<double> t_dist(0.0, 3.0);
  std::uniform_int_distribution<int> mode_dist(0, 3);
  for (int i = 0; i < n_points; ++i) {
    const SpinParams p{gamma_dist(rng), omega_dist(rng), theta_dist(rng)};
    const double t = t_dist(rng);
    const LindbladModel model = spin_model(p);
    EigenPath path = track_paths(model, {t - 0.01, t, t + 0.01});
    int m = mode_dist(rng), n = mode_dist(rng);
    if (m == n) n = (n + 1) % 4;
    double g1, g2;
    Complex tr;
    try {
      g1 = gamma_mn(path, t, m, n, GammaForm::HtDerivative);
      g2 = gamma_mn(path, t, m, n, GammaForm::RightDerivative);
      tr = gamma_trace_form(path, t, m, n);
    } catch (const DegeneracyError&) {
      continue;
    }
    const double gap = std::abs(path.at(1).eigenvalues[static_cast<size_t>(m)] -
                                path.at(1).eigenvalues[static_cast<size_t>(n)]);
    const double g3 = std::abs(tr) / gap;
    // Agreement bound 1e-4 relative plus a 1e-7 absolute budget: structurally
    // zero matrix elements only reproduce up to central-difference roundoff.
    worst = std::max(worst,
                     (std::abs(g1 - g2) - 1e-7) / std::max({g1, g2, 1e-3}));
    worst = std::max(worst,
                     (std::abs(g3 - g2) - 1e-7) / std::max({g3, g2, 1e-3}));
  }
  std::ostringstream ss;
  ss << "max relative form disagreement " << worst << " over " << n_points
     << " samples";
  result.detail = ss.str();
  result.passed = worst <= 1e-4;
  return result;
}

SuiteResult suite_closed_system_reduction(std::mt19937_64& rng, int n_points) {
  SuiteResult result{"closed_system_reduction", true, ""};
  double worst = 0.0;
  int compared = 0;
  std::uniform_real_distribution<double> omega_dist(0.05, 0.8);
  std::uniform_real_distribution<double> theta_dist(0.3, M_PI - 0.3);
  std::uniform_real_distribution<double> t_dist(0.5, 3.0);
  for (int i = 0; i < n_points; ++i) {
    const SpinParams p{0.0, omega_dist(rng), theta_dist(rng)};
    const LindbladModel model = spin_model(p);
    const double t = t_dist(rng);
    const int n_levels = model.dim();
    EigenPath path = testing::closed_composite_path(model, {t - 0.01, t, t + 0.01});
    const auto& d = path.at(1);

    // closed-system pair rates |<E_a|dE_b/dt>| from the Hermitian eigenbasis
    const double h = kDefaultFdStep;
    Eigen::SelfAdjointEigenSolver<Matrix> es0(model.hamiltonian(t));
    auto aligned_vectors = [&](double s) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(model.hamiltonian(s));
      Matrix v = es.eigenvectors();
      for (int j = 0; j < n_levels; ++j) {
        const Complex ov = es0.eigenvectors().col(j).dot(v.col(j));
        v.col(j) *= std::abs(ov) / ov;
      }
      return v;
    };
    const Matrix dv = (aligned_vectors(t + h) - aligned_vectors(t - h)) / (2.0 * h);
    Eigen::MatrixXd rate(n_levels, n_levels);
    for (int a = 0; a < n_levels; ++a)
      for (int b = 0; b < n_levels; ++b)
        rate(a, b) = std::abs(es0.eigenvectors().col(a).dot(dv.col(b)));

    // mode index (a, b) -> a * n + b by construction of the tensor path
    for (int m = 0; m < n_levels * n_levels; ++m) {
      for (int n = 0; n < n_levels * n_levels; ++n) {
        if (m == n) continue;
        const double gap = std::abs(d.eigenvalues[static_cast<size_t>(m)] -
                                    d.eigenvalues[static_cast<size_t>(n)]);
        if (gap < 1e-8) continue;
        const int ma = m / n_levels, mb = m % n_levels;
        const int na = n / n_levels, nb = n % n_levels;
        double expected = 0.0;
        if (mb == nb && ma != na) expected = rate(na, ma) / gap;
        else if (ma == na && mb != nb) expected = rate(nb, mb) / gap;
        const double got = gamma_mn(path, t, m, n, GammaForm::HtDerivative);
        worst = std::max(worst, std::abs(got - expected));
        ++compared;
      }
    }
  }
  std::ostringstream ss;
  ss << "max |Gamma - closed-system rate| = " << worst << " over " << compared
     << " mode pairs";
  result.detail = ss.str();
  result.passed = worst <= 1e-8 && compared > 0;
  return result;
}

}  // namespace

namespace testing {

EigenPath closed_composite_path(const LindbladModel& model,
                                std::vector<double> time_grid) {
  if (model.n_jumps() != 0)
    throw ArgumentError("closed_composite_path: model must have no jump operators");
  if (time_grid.size() < 2)
    throw ArgumentError("closed_composite_path: need at least two grid points");
  const int n = model.dim();
  const int dim = n * n;

  std::vector<SpectralDecomposition> decomps;
  decomps.reserve(time_grid.size());
  Matrix prev;
  for (size_t i = 0; i < time_grid.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.hamiltonian(time_grid[i]));
    Matrix v = es.eigenvectors();
    if (i == 0) {
      for (int j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        const Complex pivot = v(imax, j);
        if (std::abs(pivot) > 0.0) v.col(j) *= std::abs(pivot) / pivot;
      }
    } else {
      for (int j = 0; j < n; ++j) {
        const Complex ov = prev.col(j).dot(v.col(j));
        if (std::abs(ov) > 0.0) v.col(j) *= std::abs(ov) / ov;
      }
    }
    prev = v;

    SpectralDecomposition d;
    d.dim = dim;
    d.degeneracy_tol_abs = 0.0;  // the tensor basis resolves every cluster
    d.eigenvalues.resize(static_cast<size_t>(dim));
    d.right.resize(static_cast<size_t>(dim));
    d.left.resize(static_cast<size_t>(dim));
    d.degenerate.assign(static_cast<size_t>(dim), false);
    double diam = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const int idx = a * n + b;
        d.eigenvalues[static_cast<size_t>(idx)] =
            Complex(es.eigenvalues()(a) - es.eigenvalues()(b), 0.0);
        Vector r(dim);
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n; ++y)
            r(x * n + y) = v(x, a) * std::conj(v(y, b));
        d.right[static_cast<size_t>(idx)] = r;
        d.left[static_cast<size_t>(idx)] = r.conjugate();
      }
    }
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y)
        diam = std::max(diam, std::abs(d.eigenvalues[static_cast<size_t>(x)] -
                                       d.eigenvalues[static_cast<size_t>(y)]));
    d.spectral_diameter = diam;
    decomps.push_back(std::move(d));
  }

  std::vector<int> identity(static_cast<size_t>(dim));
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<std::vector<int>> perms(time_grid.size(), identity);
  std::vector<std::vector<Complex>> phases(
      time_grid.size(), std::vector<Complex>(static_cast<size_t>(dim), 1.0));
  return EigenPath(model, std::move(time_grid), std::move(decomps), std::move(perms),
                   std::move(phases), kDefaultDegeneracyRel);
}

}  // namespace testing

SelftestReport run_selftest(const SelftestOptions& options) {
  SelftestReport report;
  report.seed = options.seed;
  const int oracle_n = options.quick ? 20 : 100;
  const int biorth_n = options.quick ? 10 : 40;
  const int gamma_n = options.quick ? 10 : 60;
  const int closed_n = options.quick ? 4 : 12;

  std::mt19937_64 rng(options.seed);
  report.suites.push_back(suite_oracle_equivalence(rng, oracle_n, options.inject_fault));
  report.suites.push_back(suite_biorthonormality(rng, biorth_n));
  report.suites.push_back(suite_gamma_forms(rng, gamma_n));
  report.suites.push_back(suite_closed_system_reduction(rng, closed_n));
  for (auto& s : report.suites)
    if (!s.passed) s.detail += " [reproduce with --seed " + std::to_string(options.seed) + "]";
  return report;
}

}  // namespace adiabat
