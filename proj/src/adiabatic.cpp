#include "adiabat/adiabatic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include "adiabat/spin_example.hpp"

namespace adiabat {

namespace {

struct LocalFrame {
  SpectralDecomposition base;      // canonical, aligned to the path reference
  std::vector<Vector> right_dot;   // dR_m/dt by central difference
  std::vector<Vector> right_plus;  // aligned R_m(t + h)
  std::vector<Vector> right_minus;
};

LocalFrame local_frame(const EigenPath& path, double t, double h) {
  const size_t ref_idx = path.index_at(t);
  SpectralDecomposition ref = path.at(ref_idx);
  canonicalize(ref);

  SpectralDecomposition base;
  if (std::abs(path.times()[ref_idx] - t) <= 1e-14 * std::max(1.0, std::abs(t))) {
    base = std::move(ref);
  } else {
    base = align_to(ref, decompose(path.h_t(t), path.degeneracy_rel_tol())).decomp;
    canonicalize(base);
  }

  auto plus = align_to(base, decompose(path.h_t(t + h), path.degeneracy_rel_tol()));
  auto minus = align_to(base, decompose(path.h_t(t - h), path.degeneracy_rel_tol()));

  LocalFrame frame;
  frame.right_dot.resize(static_cast<size_t>(base.dim));
  frame.right_plus.resize(static_cast<size_t>(base.dim));
  frame.right_minus.resize(static_cast<size_t>(base.dim));
  for (int m = 0; m < base.dim; ++m) {
    frame.right_plus[static_cast<size_t>(m)] = plus.decomp.right[static_cast<size_t>(m)];
    frame.right_minus[static_cast<size_t>(m)] = minus.decomp.right[static_cast<size_t>(m)];
    frame.right_dot[static_cast<size_t>(m)] =
        (frame.right_plus[static_cast<size_t>(m)] - frame.right_minus[static_cast<size_t>(m)]) /
        (2.0 * h);
  }
  frame.base = std::move(base);
  return frame;
}

void check_pair(const SpectralDecomposition& d, int m, int n, bool allow_equal) {
  const int dim = d.dim;
  if (m < 0 || m >= dim || n < 0 || n >= dim)
    throw ArgumentError("gamma: mode index out of range");
  if (!allow_equal && m == n)
    throw ArgumentError("gamma: requires m != n");
  if (d.degenerate[static_cast<size_t>(m)] || d.degenerate[static_cast<size_t>(n)])
    throw DegeneracyError("gamma: pair (" + std::to_string(m) + ", " +
                          std::to_string(n) + ") involves a degenerate-flagged mode");
}

}  // namespace

double gamma_mn(const EigenPath& path, double t, int m, int n, GammaForm form,
                double h) {
  if (form == GammaForm::HtDerivative) {
    const size_t ref_idx = path.index_at(t);
    SpectralDecomposition ref = path.at(ref_idx);
    canonicalize(ref);
    SpectralDecomposition base;
    if (std::abs(path.times()[ref_idx] - t) <= 1e-14 * std::max(1.0, std::abs(t))) {
      base = std::move(ref);
    } else {
      base = align_to(ref, decompose(path.h_t(t), path.degeneracy_rel_tol())).decomp;
      canonicalize(base);
    }
    check_pair(base, m, n, false);
    const Matrix dht = central_difference([&](double s) { return path.h_t(s); }, t, h);
    const Complex gap = base.eigenvalues[static_cast<size_t>(m)] -
                        base.eigenvalues[static_cast<size_t>(n)];
    const Complex num = base.left_apply(n, (dht * base.right[static_cast<size_t>(m)]).eval());
    return std::abs(num) / std::norm(gap);
  }
  const LocalFrame frame = local_frame(path, t, h);
  check_pair(frame.base, m, n, false);
  const Complex gap = frame.base.eigenvalues[static_cast<size_t>(m)] -
                      frame.base.eigenvalues[static_cast<size_t>(n)];
  const Complex num = frame.base.left_apply(n, frame.right_dot[static_cast<size_t>(m)]);
  return std::abs(num) / std::abs(gap);
}

Complex gamma_trace_form(const EigenPath& path, double t, int m, int n, double h) {
  const LocalFrame frame = local_frame(path, t, h);
  check_pair(frame.base, m, n, true);
  const Matrix rho_plus = eigenstate_to_density(frame.right_plus[static_cast<size_t>(m)]);
  const Matrix rho_minus = eigenstate_to_density(frame.right_minus[static_cast<size_t>(m)]);
  const Matrix rho_dot = (rho_plus - rho_minus) / (2.0 * h);
  const Matrix ln = left_to_matrix(frame.base.left[static_cast<size_t>(n)]);
  return (ln * rho_dot).trace();
}

GammaMatrix gamma_matrix(const EigenPath& path, double t, GammaForm form, double h) {
  const LocalFrame frame = local_frame(path, t, h);
  const int dim = frame.base.dim;
  GammaMatrix g;
  g.time = t;
  g.entries = Eigen::MatrixXd::Constant(dim, dim, std::numeric_limits<double>::quiet_NaN());
  const Matrix dht = form == GammaForm::HtDerivative
                         ? central_difference([&](double s) { return path.h_t(s); }, t, h)
                         : Matrix();
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      if (m == n) continue;
      if (frame.base.degenerate[static_cast<size_t>(m)] ||
          frame.base.degenerate[static_cast<size_t>(n)]) {
        g.excluded_pairs.emplace_back(m, n);
        continue;
      }
      const Complex gap = frame.base.eigenvalues[static_cast<size_t>(m)] -
                          frame.base.eigenvalues[static_cast<size_t>(n)];
      if (form == GammaForm::HtDerivative) {
        const Complex num =
            frame.base.left_apply(n, (dht * frame.base.right[static_cast<size_t>(m)]).eval());
        g.entries(m, n) = std::abs(num) / std::norm(gap);
      } else {
        const Complex num = frame.base.left_apply(n, frame.right_dot[static_cast<size_t>(m)]);
        g.entries(m, n) = std::abs(num) / std::abs(gap);
      }
    }
  }
  return g;
}

GammaMax gamma_max(const EigenPath& path, double t, GammaForm form, double h) {
  const GammaMatrix g = gamma_matrix(path, t, form, h);
  GammaMax best;
  bool found = false;
  for (int m = 0; m < g.entries.rows(); ++m) {
    for (int n = 0; n < g.entries.cols(); ++n) {
      const double v = g.entries(m, n);
      if (std::isnan(v)) continue;
      found = true;
      if (v >= best.value) {
        best.value = v;
        best.m = m;
        best.n = n;
      }
    }
  }
  if (!found)
    throw DegeneracyError("gamma_max: every mode pair is degeneracy-excluded");
  return best;
}

namespace {

unsigned worker_count(size_t n_items) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* env = std::getenv("ADIABAT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) workers = std::min<unsigned>(workers, static_cast<unsigned>(cap));
  }
  return std::min<unsigned>(workers, static_cast<unsigned>(std::max<size_t>(n_items, 1)));
}

SweepPoint sweep_point(double theta, double gval, double wval, double t_eval) {
  SweepPoint p;
  p.gamma = gval;
  p.omega = wval;
  p.value = std::numeric_limits<double>::quiet_NaN();
  const SpinParams params{gval, wval, theta};
  const LindbladModel model = spin_model(params);
  const double step = 0.01;
  try {
    EigenPath path = track_paths(model, {t_eval, t_eval + step});
    const auto& d = path.at(0);
    if (std::any_of(d.degenerate.begin(), d.degenerate.end(), [](bool b) { return b; })) {
      p.excluded = true;
      return p;
    }
    const GammaMax gm = gamma_max(path, t_eval);
    p.value = gm.value;
    p.m = gm.m;
    p.n = gm.n;
  } catch (const DegeneracyError&) {
    p.excluded = true;
  } catch (const NonDiagonalizableError&) {
    p.excluded = true;
  }
  return p;
}

}  // namespace

SweepResult gamma_sweep(double theta, std::vector<double> gamma_grid,
                        std::vector<double> omega_grid, double t_eval) {
  if (gamma_grid.empty() || omega_grid.empty())
    throw ArgumentError("gamma_sweep: grids must be non-empty");
  for (double g : gamma_grid)
    if (!(g >= 0.0)) throw ArgumentError("gamma_sweep: gamma must be >= 0");
  for (double w : omega_grid)
    if (!std::isfinite(w)) throw ArgumentError("gamma_sweep: omega must be finite");

  SweepResult result;
  result.theta = theta;
  result.t_eval = t_eval;
  result.gamma_grid = std::move(gamma_grid);
  result.omega_grid = std::move(omega_grid);
  const size_t total = result.gamma_grid.size() * result.omega_grid.size();
  result.points.resize(total);

  std::atomic<size_t> next{0};
  auto work = [&]() {
    while (true) {
      const size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      const size_t gi = idx / result.omega_grid.size();
      const size_t wi = idx % result.omega_grid.size();
      result.points[idx] =
          sweep_point(theta, result.gamma_grid[gi], result.omega_grid[wi], t_eval);
    }
  };
  const unsigned workers = worker_count(total);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return result;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "gamma,omega,Gamma,arg_m,arg_n,excluded\n";
  for (const auto& p : result.points) {
    out << fmt17(p.gamma) << ',' << fmt17(p.omega) << ','
        << (p.excluded ? "nan" : fmt17(p.value)) << ',' << p.m << ',' << p.n << ','
        << (p.excluded ? 1 : 0) << '\n';
  }
}

namespace {

struct PathSlice {
  size_t i0 = 0;
  size_t i1 = 0;
};

PathSlice slice_of(const EigenPath& path, double t0, double t1) {
  const auto& times = path.times();
  const double span = std::max(1.0, times.back() - times.front());
  auto locate = [&](double t) {
    const size_t i = path.index_at(t);
    if (std::abs(times[i] - t) > 1e-9 * span)
      throw ArgumentError("adiabatic propagation: endpoint is not a path grid point");
    return i;
  };
  PathSlice s;
  s.i0 = locate(t0);
  s.i1 = locate(t1);
  if (s.i1 <= s.i0) throw ArgumentError("adiabatic propagation: require t1 > t0");
  return s;
}

// dR/dt per mode on the grid slice: central differences inside, one-sided at
// the slice ends.
std::vector<std::vector<Vector>> grid_right_dots(const EigenPath& path,
                                                 const PathSlice& s) {
  const auto& times = path.times();
  const int dim = path.dim();
  const size_t len = s.i1 - s.i0 + 1;
  std::vector<std::vector<Vector>> dots(len, std::vector<Vector>(static_cast<size_t>(dim)));
  for (size_t i = s.i0; i <= s.i1; ++i) {
    const size_t lo = i == s.i0 ? i : i - 1;
    const size_t hi = i == s.i1 ? i : i + 1;
    const double dt = times[hi] - times[lo];
    for (int m = 0; m < dim; ++m)
      dots[i - s.i0][static_cast<size_t>(m)] =
          (path.at(hi).right[static_cast<size_t>(m)] -
           path.at(lo).right[static_cast<size_t>(m)]) /
          dt;
  }
  return dots;
}

}  // namespace

namespace {

// Modes grouped by the degeneracy tolerance of the slice's first
// decomposition. Tracking keeps memberships stable along the path.
std::vector<std::vector<int>> path_clusters(const SpectralDecomposition& d) {
  const int dim = d.dim;
  std::vector<int> owner(static_cast<size_t>(dim), -1);
  std::vector<std::vector<int>> clusters;
  for (int m = 0; m < dim; ++m) {
    if (owner[static_cast<size_t>(m)] >= 0) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.push_back({m});
    owner[static_cast<size_t>(m)] = id;
    for (int k = m + 1; k < dim; ++k) {
      if (owner[static_cast<size_t>(k)] >= 0) continue;
      bool joins = false;
      for (int member : clusters.back())
        if (d.pair_degenerate(member, k)) joins = true;
      if (joins) {
        clusters.back().push_back(k);
        owner[static_cast<size_t>(k)] = id;
      }
    }
  }
  return clusters;
}

}  // namespace

AdiabaticTrajectory adiabatic_propagate(const EigenPath& path, const Vector& psi0,
                                        double t0, double t1) {
  const PathSlice s = slice_of(path, t0, t1);
  const auto& times = path.times();
  const int dim = path.dim();
  if (psi0.size() != dim)
    throw DimensionError("adiabatic_propagate: state dimension mismatch");

  const auto dots = grid_right_dots(path, s);
  const size_t len = s.i1 - s.i0 + 1;
  auto coupling = [&](size_t i, int m, int n) {
    return path.at(s.i0 + i).left_apply(m, dots[i][static_cast<size_t>(n)]);
  };

  // Full mode amplitudes b_m = c_m exp(-i Phase_m), stored per grid point.
  std::vector<Vector> amps(len);
  amps[0] = Vector(dim);
  for (int m = 0; m < dim; ++m) amps[0](m) = path.at(s.i0).left_apply(m, psi0);

  const auto clusters = path_clusters(path.at(s.i0));
  for (size_t i = 1; i < len; ++i) amps[i] = Vector::Zero(dim);

  for (const auto& cluster : clusters) {
    if (cluster.size() == 1) {
      // nondegenerate mode: scalar transport with trapezoid integrals
      const int m = cluster.front();
      const size_t mm = static_cast<size_t>(m);
      Complex phase = 0.0, decay = 0.0;
      for (size_t i = 1; i < len; ++i) {
        const double dt = times[s.i0 + i] - times[s.i0 + i - 1];
        phase += 0.5 * dt *
                 (path.at(s.i0 + i - 1).eigenvalues[mm] +
                  path.at(s.i0 + i).eigenvalues[mm]);
        decay += 0.5 * dt * (coupling(i - 1, m, m) + coupling(i, m, m));
        amps[i](m) = amps[0](m) * std::exp(-decay) * std::exp(-kI * phase);
      }
      continue;
    }
    // Degeneracy-flagged cluster: the tracked basis is already
    // parallel-transported (each step is locked biorthogonally to the
    // previous one), so the in-cluster connection vanishes in this gauge and
    // the amplitudes only accumulate dynamical phases.
    for (int idx : cluster) {
      const size_t mm = static_cast<size_t>(idx);
      Complex phase = 0.0;
      for (size_t i = 1; i < len; ++i) {
        const double dt = times[s.i0 + i] - times[s.i0 + i - 1];
        phase += 0.5 * dt *
                 (path.at(s.i0 + i - 1).eigenvalues[mm] +
                  path.at(s.i0 + i).eigenvalues[mm]);
        amps[i](idx) = amps[0](idx) * std::exp(-kI * phase);
      }
    }
  }

  AdiabaticTrajectory traj;
  traj.times.reserve(len);
  traj.states.reserve(len);
  for (size_t i = 0; i < len; ++i) {
    Vector psi = Vector::Zero(dim);
    for (int m = 0; m < dim; ++m)
      psi += amps[i](m) * path.at(s.i0 + i).right[static_cast<size_t>(m)];
    traj.times.push_back(times[s.i0 + i]);
    traj.states.push_back(std::move(psi));
  }
  return traj;
}

AdiabaticTrajectory coefficient_propagate_exact(const EigenPath& path,
                                                const Vector& psi0, double t0,
                                                double t1) {
  const PathSlice s = slice_of(path, t0, t1);
  const auto& times = path.times();
  const int dim = path.dim();
  if (psi0.size() != dim)
    throw DimensionError("coefficient_propagate_exact: state dimension mismatch");

  const auto dots = grid_right_dots(path, s);
  const size_t len = s.i1 - s.i0 + 1;

  // b_m = c_m * exp(-i Phase_m) obeys b' = M(t) b with
  // M = -i diag(lambda) - K, K_mn = <L_m|dR_n/dt>. Entries inside a
  // degeneracy cluster are dropped: the tracked cluster basis is
  // parallel-transported, so its connection vanishes in this gauge and the
  // grid differences there carry only discretization noise.
  const auto clusters = path_clusters(path.at(s.i0));
  std::vector<int> cluster_of(static_cast<size_t>(dim), -1);
  for (size_t c = 0; c < clusters.size(); ++c)
    if (clusters[c].size() > 1)
      for (int idx : clusters[c]) cluster_of[static_cast<size_t>(idx)] = static_cast<int>(c);
  std::vector<Matrix> coeff(len);
  for (size_t i = 0; i < len; ++i) {
    Matrix m = Matrix::Zero(dim, dim);
    const auto& d = path.at(s.i0 + i);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        const bool same_cluster =
            cluster_of[static_cast<size_t>(a)] >= 0 &&
            cluster_of[static_cast<size_t>(a)] == cluster_of[static_cast<size_t>(b)];
        if (!same_cluster) m(a, b) = -d.left_apply(a, dots[i][static_cast<size_t>(b)]);
      }
      m(a, a) -= kI * d.eigenvalues[static_cast<size_t>(a)];
    }
    coeff[i] = std::move(m);
  }

  Vector b(dim);
  for (int m = 0; m < dim; ++m) b(m) = path.at(s.i0).left_apply(m, psi0);

  AdiabaticTrajectory traj;
  traj.times.reserve(len);
  traj.states.reserve(len);
  auto emit = [&](size_t i) {
    Vector psi = Vector::Zero(dim);
    for (int m = 0; m < dim; ++m) psi += b(m) * path.at(s.i0 + i).right[static_cast<size_t>(m)];
    traj.times.push_back(times[s.i0 + i]);
    traj.states.push_back(std::move(psi));
  };
  emit(0);
  for (size_t i = 1; i < len; ++i) {
    const double dt = times[s.i0 + i] - times[s.i0 + i - 1];
    const Matrix& m0 = coeff[i - 1];
    const Matrix& m1 = coeff[i];
    const Matrix mh = 0.5 * (m0 + m1);  // linear interpolant midpoint
    const Vector k1 = m0 * b;
    const Vector k2 = mh * (b + 0.5 * dt * k1).eval();
    const Vector k3 = mh * (b + 0.5 * dt * k2).eval();
    const Vector k4 = m1 * (b + dt * k3).eval();
    b += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    emit(i);
  }
  return traj;
}

AdiabaticErrorReport adiabatic_error(const LindbladModel& model,
                                     const DensityMatrix& rho0, double t1,
                                     int grid_points, const IntegratorConfig& cfg) {
  if (grid_points < 3) throw ArgumentError("adiabatic_error: grid_points >= 3 required");
  const double t0 = model.t_domain().start;
  if (!(t1 > t0)) throw ArgumentError("adiabatic_error: t1 must exceed the domain start");

  std::vector<double> grid(static_cast<size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i)
    grid[static_cast<size_t>(i)] = t0 + (t1 - t0) * i / (grid_points - 1);

  EigenPath path = track_paths(model, grid);
  const Vector psi0 = embed_density(rho0);
  const AdiabaticTrajectory adiab = adiabatic_propagate(path, psi0, t0, t1);

  auto rhs = [&](double t, const Vector& y) {
    return (-kI * (path.h_t(t) * y)).eval();
  };
  const OdeTrajectory exact =
      integrate_ode(rhs, psi0, t0, t1, cfg, std::span<const double>(grid.data() + 1, grid.size() - 2));

  AdiabaticErrorReport report;
  report.times = grid;
  const int dim = path.dim();
  report.exact_mode_amps.resize(grid_points, dim);
  report.adiabatic_mode_amps.resize(grid_points, dim);
  for (int i = 0; i < grid_points; ++i) {
    const auto& d = path.at(static_cast<size_t>(i));
    for (int m = 0; m < dim; ++m) {
      report.exact_mode_amps(i, m) =
          std::abs(d.left_apply(m, exact.states[static_cast<size_t>(i)]));
      report.adiabatic_mode_amps(i, m) =
          std::abs(d.left_apply(m, adiab.states[static_cast<size_t>(i)]));
    }
  }
  report.trace_distance = trace_distance(extract_density(exact.states.back()),
                                         extract_density(adiab.states.back()));
  return report;
}

}  // namespace adiabat
