#pragma once

#include "adiabat/model.hpp"
#include "adiabat/numerics.hpp"

namespace adiabat {

// Flat index convention throughout: component (m, n) of the composite vector
// sits at m*N + n, i.e. system index first. System operators act as O (x) I,
// ancilla operators as I (x) O^A.

// rho -> |Psi_rho>, psi[m*N + n] = rho(m, n). Norm^2 equals Tr(rho^2).
Vector embed_density(const Matrix& rho);
Vector embed_density(const DensityMatrix& rho);

// Inverse reshape; no hermitization or normalization (diagnostic extraction).
Matrix extract_density(const Vector& psi);

// O^A(m, n) = conj(O(m, n)): elementwise conjugate in the fixed basis.
Matrix ancilla_lift(const Matrix& o);

struct EffectiveHamiltonian {
  int dim = 0;  // N^2
  double time = 0.0;
  Matrix matrix;
};

// Non-Hermitian generator of the embedded flow i d|Psi>/dt = H_T |Psi>:
//   H_T = Heff (x) I - I (x) conj(Heff) + i sum_k Lk (x) conj(Lk),
// with Heff = H - (i/2) sum_k Lk'Lk.
EffectiveHamiltonian build_effective_hamiltonian(const LindbladModel& model,
                                                 double t);

// Independent construction: applies the master-equation generator to each
// matrix unit and flattens column by column. Must equal
// build_effective_hamiltonian entrywise; kept free of any Kronecker algebra
// so the two routes stay independent.
Matrix build_liouvillian_superoperator(const LindbladModel& model, double t);

// Re-expresses a model in the eigenbasis of H(t_start): eigenvalues ascending,
// each eigenvector's largest-magnitude component made real-positive. All
// schedules become piecewise-linear samples on a uniform grid except constants,
// which stay constant.
LindbladModel to_initial_eigenbasis(const LindbladModel& model, int n_samples = 257);

namespace detail {
// coupling_sign scales the i sum_k Lk (x) conj(Lk) term; the only caller with
// sign != +1 is the selftest fault-injection hook.
Matrix effective_matrix(const LindbladModel& model, double t, double coupling_sign);
}  // namespace detail

}  // namespace adiabat
