#include "adiabat/embed.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace adiabat {

Vector embed_density(const Matrix& rho) {
  if (rho.rows() != rho.cols())
    throw DimensionError("embed_density: matrix must be square");
  const Eigen::Index n = rho.rows();
  Vector psi(n * n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) psi(m * n + k) = rho(m, k);
  return psi;
}

Vector embed_density(const DensityMatrix& rho) { return embed_density(rho.matrix()); }

Matrix extract_density(const Vector& psi) {
  const auto len = psi.size();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(len))));
  if (n * n != len)
    throw DimensionError("extract_density: length is not a perfect square");
  Matrix rho(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) rho(m, k) = psi(m * n + k);
  return rho;
}

Matrix ancilla_lift(const Matrix& o) {
  if (o.rows() != o.cols())
    throw DimensionError("ancilla_lift: matrix must be square");
  return o.conjugate();
}

namespace detail {

Matrix effective_matrix(const LindbladModel& model, double t, double coupling_sign) {
  model.check_time(t);
  const int n = model.dim();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix heff = model.hamiltonian(t);
  for (size_t k = 0; k < model.n_jumps(); ++k) {
    const Matrix l = model.jump_op(k, t);
    heff -= Complex(0.0, 0.5) * (l.adjoint() * l);
  }
  Matrix ht = kron(heff, eye) - kron(eye, ancilla_lift(heff));
  for (size_t k = 0; k < model.n_jumps(); ++k) {
    const Matrix l = model.jump_op(k, t);
    ht += coupling_sign * kI * kron(l, ancilla_lift(l));
  }
  return ht;
}

}  // namespace detail

EffectiveHamiltonian build_effective_hamiltonian(const LindbladModel& model,
                                                 double t) {
  EffectiveHamiltonian h;
  h.dim = model.dim() * model.dim();
  h.time = t;
  h.matrix = detail::effective_matrix(model, t, +1.0);
  return h;
}

Matrix build_liouvillian_superoperator(const LindbladModel& model, double t) {
  model.check_time(t);
  const int n = model.dim();
  Matrix s(n * n, n * n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      Matrix unit = Matrix::Zero(n, n);
      unit(p, q) = 1.0;
      s.col(p * n + q) = embed_density(liouvillian_apply(model, t, unit));
    }
  }
  return s;
}

LindbladModel to_initial_eigenbasis(const LindbladModel& model, int n_samples) {
  const Matrix h0 = model.hamiltonian(model.t_domain().start);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h0 + h0.adjoint()));
  Matrix v = es.eigenvectors();  // columns, eigenvalues ascending
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    const Complex pivot = v(imax, j);
    if (std::abs(pivot) > 0.0) v.col(j) *= std::abs(pivot) / pivot;
  }
  const Matrix u = v.adjoint();  // maps old coordinates to eigenbasis ones

  auto transform = [&](const OperatorSchedule& s) {
    if (s.kind() == OperatorSchedule::Kind::Constant)
      return OperatorSchedule::constant(u * s.constant_matrix() * u.adjoint());
    const auto& dom = model.t_domain();
    std::vector<double> times(static_cast<size_t>(n_samples));
    std::vector<Matrix> mats(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
      const double t = dom.start + (dom.end - dom.start) * i / (n_samples - 1);
      times[static_cast<size_t>(i)] = t;
      mats[static_cast<size_t>(i)] = u * s.at(t) * u.adjoint();
    }
    return OperatorSchedule::piecewise_linear(std::move(times), std::move(mats));
  };

  std::vector<OperatorSchedule> jumps;
  for (const auto& l : model.jump_schedules()) jumps.push_back(transform(l));
  return LindbladModel(model.dim(), transform(model.hamiltonian_schedule()),
                       std::move(jumps), model.t_domain());
}

}  // namespace adiabat
