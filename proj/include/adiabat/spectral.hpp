#pragma once

#include "adiabat/embed.hpp"
#include "adiabat/model.hpp"
#include "adiabat/numerics.hpp"

namespace adiabat {

// Relative degeneracy threshold: eigenvalue pairs closer than
// rel_tol * spectral diameter are flagged degenerate.
inline constexpr double kDefaultDegeneracyRel = 1e-8;

// Matched eigentriples of a (generally non-Hermitian) matrix. Right vectors
// are unit-norm kets; left vectors are stored as bra coefficient rows, so
// <L_m|x> is the plain (unconjugated) dot product left[m].dot-free x.
// After construction <L_m|R_m> = 1 and <L_m|R_n> = 0 for nondegenerate pairs.
struct SpectralDecomposition {
  int dim = 0;
  std::vector<Complex> eigenvalues;
  std::vector<Vector> right;
  std::vector<Vector> left;
  std::vector<bool> degenerate;
  double degeneracy_tol_abs = 0.0;
  double spectral_diameter = 0.0;

  Complex left_apply(int m, const Vector& x) const {
    return left[static_cast<size_t>(m)].cwiseProduct(x).sum();
  }
  bool pair_degenerate(int m, int n) const {
    return std::abs(eigenvalues[static_cast<size_t>(m)] -
                    eigenvalues[static_cast<size_t>(n)]) <= degeneracy_tol_abs;
  }
};

// Full biorthogonal eigensystem, eigenvalues sorted by (Re, Im) ascending.
// Left vectors come from the adjoint eigensystem, paired by conjugate
// eigenvalue and biorthogonalized cluster-wise; a residual above 1e-6 raises
// NonDiagonalizableError.
SpectralDecomposition decompose(const Matrix& ht,
                                double degeneracy_rel_tol = kDefaultDegeneracyRel);
SpectralDecomposition decompose(const EffectiveHamiltonian& ht,
                                double degeneracy_rel_tol = kDefaultDegeneracyRel);

// Rescales each pair to a unit-norm right vector, absorbing scale into the
// left vector; <L|R> = 1 is preserved.
void canonicalize(SpectralDecomposition& d);

struct Alignment {
  SpectralDecomposition decomp;
  std::vector<int> permutation;  // aligned mode m came from input mode permutation[m]
  std::vector<Complex> phases;   // unit factor applied to each right vector
  std::vector<double> overlaps;  // |<L_m(ref)|R_m(aligned)>| per mode
  double min_abs_overlap = 0.0;  // over all modes
};

// Permutes and phase-fixes `cur` so that mode m maximizes |<L_m(ref)|R_m(cur)>|
// (greedy assignment) and the matched overlap is real-positive.
Alignment align_to(const SpectralDecomposition& ref, const SpectralDecomposition& cur);

// Continuity-tracked eigensystem over a time grid.
class EigenPath {
 public:
  EigenPath(LindbladModel model, std::vector<double> times,
            std::vector<SpectralDecomposition> decomps,
            std::vector<std::vector<int>> permutations,
            std::vector<std::vector<Complex>> phases, double rel_tol);

  const LindbladModel& model() const { return model_; }
  const std::vector<double>& times() const { return times_; }
  const SpectralDecomposition& at(size_t i) const { return decomps_.at(i); }
  size_t size() const { return times_.size(); }
  int dim() const { return decomps_.front().dim; }
  double degeneracy_rel_tol() const { return rel_tol_; }
  const std::vector<std::vector<int>>& permutations() const { return permutations_; }
  const std::vector<std::vector<Complex>>& phases() const { return phases_; }

  // Nearest grid index; t must lie within the grid span.
  size_t index_at(double t) const;
  Matrix h_t(double t) const;

 private:
  LindbladModel model_;
  std::vector<double> times_;
  std::vector<SpectralDecomposition> decomps_;
  std::vector<std::vector<int>> permutations_;
  std::vector<std::vector<Complex>> phases_;
  double rel_tol_;
};

// Decomposes H_T on every grid point and aligns adjacent times. A matched
// overlap below 0.5 raises TrackingError naming the interval.
EigenPath track_paths(const LindbladModel& model, std::vector<double> time_grid,
                      double degeneracy_rel_tol = kDefaultDegeneracyRel);

// Reshape of a composite right eigenvector into its density-matrix form
// (no normalization).
Matrix eigenstate_to_density(const Vector& r);

// Matrix form of a left (bra) vector chosen so that
// <L|x> = Tr(left_to_matrix(l) * extract_density(x)) exactly.
Matrix left_to_matrix(const Vector& l);

}  // namespace adiabat
