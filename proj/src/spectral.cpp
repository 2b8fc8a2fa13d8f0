#include "adiabat/spectral.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace adiabat {

namespace {

std::vector<int> cluster_labels(const std::vector<Complex>& values, double tol) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(values[static_cast<size_t>(i)] - values[static_cast<size_t>(j)]) <= tol)
        parent[static_cast<size_t>(find(i))] = find(j);
  std::vector<int> label(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) label[static_cast<size_t>(i)] = find(i);
  return label;
}

}  // namespace

SpectralDecomposition decompose(const Matrix& ht, double degeneracy_rel_tol) {
  if (ht.rows() != ht.cols())
    throw DimensionError("decompose: matrix must be square");
  if (!all_finite(ht)) throw NumericError("decompose: non-finite entries");
  const int n = static_cast<int>(ht.rows());

  auto rights = eigensolve_general(ht);
  auto lefts = eigensolve_general(ht.adjoint());

  SpectralDecomposition d;
  d.dim = n;
  d.eigenvalues.resize(static_cast<size_t>(n));
  d.right.resize(static_cast<size_t>(n));
  d.left.resize(static_cast<size_t>(n));
  d.degenerate.assign(static_cast<size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    d.eigenvalues[static_cast<size_t>(i)] = rights[static_cast<size_t>(i)].value;
    d.right[static_cast<size_t>(i)] = rights[static_cast<size_t>(i)].right;
  }

  // Pair left candidates by conjugate eigenvalue, closest first.
  std::vector<std::tuple<double, int, int>> dist;
  dist.reserve(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dist.emplace_back(std::abs(std::conj(lefts[static_cast<size_t>(j)].value) -
                                 d.eigenvalues[static_cast<size_t>(i)]),
                        i, j);
  std::sort(dist.begin(), dist.end());
  std::vector<bool> right_used(static_cast<size_t>(n), false);
  std::vector<bool> left_used(static_cast<size_t>(n), false);
  for (const auto& [w, i, j] : dist) {
    if (right_used[static_cast<size_t>(i)] || left_used[static_cast<size_t>(j)]) continue;
    right_used[static_cast<size_t>(i)] = left_used[static_cast<size_t>(j)] = true;
    // bra coefficients of <L| are the conjugated adjoint-eigenvector entries
    d.left[static_cast<size_t>(i)] = lefts[static_cast<size_t>(j)].right.conjugate();
  }

  double diameter = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      diameter = std::max(diameter, std::abs(d.eigenvalues[static_cast<size_t>(i)] -
                                             d.eigenvalues[static_cast<size_t>(j)]));
  d.spectral_diameter = diameter;
  d.degeneracy_tol_abs = degeneracy_rel_tol * diameter;

  // Biorthogonalize inside degeneracy clusters. For clusters of two or more
  // modes the solver's returned vectors can be nearly dependent even when the
  // eigenspace is healthy, so both bases are rebuilt from the SVD kernel of
  // (A - mean I); a kernel smaller than the cluster proves defectiveness.
  const auto labels = cluster_labels(d.eigenvalues, d.degeneracy_tol_abs);
  for (int root = 0; root < n; ++root) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (labels[static_cast<size_t>(i)] == root) members.push_back(i);
    if (members.empty()) continue;
    const int k = static_cast<int>(members.size());

    if (k > 1) {
      Complex mean = 0.0;
      double width = 0.0;
      for (int a : members) mean += d.eigenvalues[static_cast<size_t>(a)];
      mean /= static_cast<double>(k);
      for (int a : members)
        width = std::max(width, std::abs(d.eigenvalues[static_cast<size_t>(a)] - mean));
      const Matrix shifted = ht - mean * Matrix::Identity(n, n);
      Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      const double tau = std::max(10.0 * width, 1e-10 * std::max(sv(0), 1e-300));
      int kernel = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= tau) ++kernel;
      if (kernel < k)
        throw NonDiagonalizableError(
            "decompose: defective eigenvalue cluster (invariant subspace smaller "
            "than its multiplicity)");
      for (int a = 0; a < k; ++a) {
        const size_t idx = static_cast<size_t>(members[static_cast<size_t>(a)]);
        d.right[idx] = svd.matrixV().col(n - k + a);
        d.left[idx] = svd.matrixU().col(n - k + a).conjugate();
      }
    }

    Matrix b(k, k);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c)
        b(a, c) = d.left_apply(members[static_cast<size_t>(a)],
                               d.right[static_cast<size_t>(members[static_cast<size_t>(c)])]);
    if (k > 1) {
      Eigen::JacobiSVD<Matrix> bsvd(b);
      const auto& bsv = bsvd.singularValues();
      if (bsv(bsv.size() - 1) <= 1e-6 * std::max(bsv(0), 1e-300))
        throw NonDiagonalizableError(
            "decompose: defective eigenvalue cluster (biorthogonalization failed)");
    }
    Eigen::FullPivLU<Matrix> lu(b);
    if (!lu.isInvertible())
      throw NonDiagonalizableError(
          "decompose: defective eigenvalue cluster (biorthogonalization failed)");
    const Matrix binv = lu.inverse();
    std::vector<Vector> fresh(static_cast<size_t>(k));
    for (int a = 0; a < k; ++a) {
      Vector acc = Vector::Zero(n);
      for (int c = 0; c < k; ++c)
        acc += binv(a, c) * d.left[static_cast<size_t>(members[static_cast<size_t>(c)])];
      fresh[static_cast<size_t>(a)] = std::move(acc);
    }
    for (int a = 0; a < k; ++a)
      d.left[static_cast<size_t>(members[static_cast<size_t>(a)])] =
          std::move(fresh[static_cast<size_t>(a)]);
  }

  // Residual check, then exact pairwise normalization.
  double max_offdiag = 0.0;
  double min_diag = 1e300;
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) {
      const Complex o = d.left_apply(m, d.right[static_cast<size_t>(k)]);
      if (m == k)
        min_diag = std::min(min_diag, std::abs(o));
      else if (!d.pair_degenerate(m, k))
        max_offdiag = std::max(max_offdiag, std::abs(o));
    }
  }
  if (min_diag < 1e-6 || max_offdiag > 1e-6)
    throw NonDiagonalizableError(
        "decompose: biorthogonalization residual above 1e-6 (matrix defective "
        "or severely ill-conditioned)");
  for (int m = 0; m < n; ++m)
    d.left[static_cast<size_t>(m)] /= d.left_apply(m, d.right[static_cast<size_t>(m)]);

  for (int m = 0; m < n; ++m) {
    double closest = 1e300;
    for (int k = 0; k < n; ++k)
      if (k != m)
        closest = std::min(closest, std::abs(d.eigenvalues[static_cast<size_t>(m)] -
                                             d.eigenvalues[static_cast<size_t>(k)]));
    d.degenerate[static_cast<size_t>(m)] = closest <= d.degeneracy_tol_abs;
  }
  return d;
}

SpectralDecomposition decompose(const EffectiveHamiltonian& ht, double rel_tol) {
  return decompose(ht.matrix, rel_tol);
}

void canonicalize(SpectralDecomposition& d) {
  for (size_t m = 0; m < d.right.size(); ++m) {
    const double nr = d.right[m].norm();
    if (nr == 0.0) continue;
    d.right[m] /= nr;
    d.left[m] *= nr;
  }
}

Alignment align_to(const SpectralDecomposition& ref, const SpectralDecomposition& cur) {
  const int n = ref.dim;
  if (cur.dim != n) throw DimensionError("align_to: dimension mismatch");
  std::vector<std::tuple<double, int, int>> overlaps;
  overlaps.reserve(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      overlaps.emplace_back(std::abs(ref.left_apply(m, cur.right[static_cast<size_t>(k)])), m, k);
  std::sort(overlaps.begin(), overlaps.end(),
            [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });

  std::vector<int> perm(static_cast<size_t>(n), -1);
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (const auto& [w, m, k] : overlaps) {
    if (perm[static_cast<size_t>(m)] != -1 || used[static_cast<size_t>(k)]) continue;
    perm[static_cast<size_t>(m)] = k;
    used[static_cast<size_t>(k)] = true;
  }

  Alignment out;
  out.permutation = perm;
  out.phases.resize(static_cast<size_t>(n), Complex(1.0, 0.0));
  out.overlaps.resize(static_cast<size_t>(n), 0.0);
  out.decomp.dim = n;
  out.decomp.degeneracy_tol_abs = cur.degeneracy_tol_abs;
  out.decomp.spectral_diameter = cur.spectral_diameter;
  out.decomp.eigenvalues.resize(static_cast<size_t>(n));
  out.decomp.right.resize(static_cast<size_t>(n));
  out.decomp.left.resize(static_cast<size_t>(n));
  out.decomp.degenerate.resize(static_cast<size_t>(n));
  out.min_abs_overlap = 1e300;

  for (int m = 0; m < n; ++m) {
    const int src = perm[static_cast<size_t>(m)];
    const Complex o = ref.left_apply(m, cur.right[static_cast<size_t>(src)]);
    const double mag = std::abs(o);
    const Complex u = mag > 0.0 ? mag / o : Complex(1.0, 0.0);
    out.phases[static_cast<size_t>(m)] = u;
    out.decomp.eigenvalues[static_cast<size_t>(m)] = cur.eigenvalues[static_cast<size_t>(src)];
    out.decomp.right[static_cast<size_t>(m)] = cur.right[static_cast<size_t>(src)] * u;
    out.decomp.left[static_cast<size_t>(m)] = cur.left[static_cast<size_t>(src)] / u;
    out.decomp.degenerate[static_cast<size_t>(m)] = cur.degenerate[static_cast<size_t>(src)];
  }

  // Inside a degeneracy cluster the eigensolver basis is arbitrary and can
  // jump between nearby matrices; a permutation and a phase cannot undo that.
  // Replace each cluster basis by the in-span combination exactly
  // biorthogonal to the reference's cluster lefts, which makes tracked
  // cluster bases continuous.
  const auto labels = cluster_labels(ref.eigenvalues, ref.degeneracy_tol_abs);
  for (int root = 0; root < n; ++root) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (labels[static_cast<size_t>(i)] == root) members.push_back(i);
    const int k = static_cast<int>(members.size());
    if (k < 2) continue;
    Matrix o(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        o(a, b) = ref.left_apply(members[static_cast<size_t>(a)],
                                 out.decomp.right[static_cast<size_t>(members[static_cast<size_t>(b)])]);
    Eigen::FullPivLU<Matrix> lu(o);
    if (!lu.isInvertible()) continue;  // leaves the raw match; overlaps stay low
    const Matrix a_mix = lu.inverse();
    std::vector<Vector> new_right(static_cast<size_t>(k));
    std::vector<Vector> new_left(static_cast<size_t>(k));
    for (int b = 0; b < k; ++b) {
      Vector r = Vector::Zero(n);
      for (int a = 0; a < k; ++a)
        r += out.decomp.right[static_cast<size_t>(members[static_cast<size_t>(a)])] *
             a_mix(a, b);
      new_right[static_cast<size_t>(b)] = std::move(r);
    }
    for (int a = 0; a < k; ++a) {
      Vector l = Vector::Zero(n);
      for (int c = 0; c < k; ++c)
        l += out.decomp.left[static_cast<size_t>(members[static_cast<size_t>(c)])] *
             o(a, c);
      new_left[static_cast<size_t>(a)] = std::move(l);
    }
    for (int a = 0; a < k; ++a) {
      const size_t idx = static_cast<size_t>(members[static_cast<size_t>(a)]);
      const double nr = new_right[static_cast<size_t>(a)].norm();
      out.decomp.right[idx] = new_right[static_cast<size_t>(a)] / nr;
      out.decomp.left[idx] = new_left[static_cast<size_t>(a)] * nr;
    }
  }

  for (int m = 0; m < n; ++m) {
    const double mag =
        std::abs(ref.left_apply(m, out.decomp.right[static_cast<size_t>(m)]));
    out.overlaps[static_cast<size_t>(m)] = mag;
    out.min_abs_overlap = std::min(out.min_abs_overlap, mag);
  }
  return out;
}

EigenPath::EigenPath(LindbladModel model, std::vector<double> times,
                     std::vector<SpectralDecomposition> decomps,
                     std::vector<std::vector<int>> permutations,
                     std::vector<std::vector<Complex>> phases, double rel_tol)
    : model_(std::move(model)),
      times_(std::move(times)),
      decomps_(std::move(decomps)),
      permutations_(std::move(permutations)),
      phases_(std::move(phases)),
      rel_tol_(rel_tol) {}

size_t EigenPath::index_at(double t) const {
  const double slack = 1e-9 * std::max(1.0, times_.back() - times_.front());
  if (t < times_.front() - slack || t > times_.back() + slack)
    throw DomainError("EigenPath: t outside tracked grid");
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  if (it == times_.end()) return times_.size() - 1;
  const size_t hi = static_cast<size_t>(it - times_.begin());
  const size_t lo = hi - 1;
  return (t - times_[lo] <= times_[hi] - t) ? lo : hi;
}

Matrix EigenPath::h_t(double t) const {
  return build_effective_hamiltonian(model_, t).matrix;
}

EigenPath track_paths(const LindbladModel& model, std::vector<double> time_grid,
                      double degeneracy_rel_tol) {
  if (time_grid.size() < 2)
    throw ArgumentError("track_paths: need at least two grid points");
  for (size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1]))
      throw ArgumentError("track_paths: grid must be strictly increasing");
  for (double t : time_grid) model.check_time(t);

  std::vector<SpectralDecomposition> decomps;
  std::vector<std::vector<int>> perms;
  std::vector<std::vector<Complex>> phases;
  decomps.reserve(time_grid.size());

  decomps.push_back(
      decompose(build_effective_hamiltonian(model, time_grid[0]).matrix, degeneracy_rel_tol));
  const int n = decomps.front().dim;
  std::vector<int> identity(static_cast<size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  perms.push_back(identity);
  phases.emplace_back(static_cast<size_t>(n), Complex(1.0, 0.0));

  for (size_t i = 1; i < time_grid.size(); ++i) {
    auto raw = decompose(build_effective_hamiltonian(model, time_grid[i]).matrix,
                         degeneracy_rel_tol);
    auto al = align_to(decomps.back(), raw);
    // Degeneracy-flagged modes carry an arbitrary in-cluster basis, so the
    // continuity criterion only applies to the nondegenerate ones.
    for (int m = 0; m < n; ++m) {
      const auto mm = static_cast<size_t>(m);
      if (decomps.back().degenerate[mm] || al.decomp.degenerate[mm]) continue;
      if (al.overlaps[mm] < 0.5)
        throw TrackingError(
            "track_paths: overlap " + std::to_string(al.overlaps[mm]) +
                " for mode " + std::to_string(m) + " below 0.5 on interval [" +
                std::to_string(time_grid[i - 1]) + ", " +
                std::to_string(time_grid[i]) + "]; refine the grid",
            time_grid[i - 1], time_grid[i]);
    }
    decomps.push_back(std::move(al.decomp));
    perms.push_back(std::move(al.permutation));
    phases.push_back(std::move(al.phases));
  }
  return EigenPath(model, std::move(time_grid), std::move(decomps), std::move(perms),
                   std::move(phases), degeneracy_rel_tol);
}

Matrix eigenstate_to_density(const Vector& r) { return extract_density(r); }

Matrix left_to_matrix(const Vector& l) {
  return extract_density(l).transpose();
}

}  // namespace adiabat
