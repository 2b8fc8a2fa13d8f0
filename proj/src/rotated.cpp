#include "adiabat/rotated.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "adiabat/adiabatic.hpp"
#include "adiabat/spectral.hpp"

namespace adiabat {

size_t RotatingFrame::index_at(double t) const {
  const double slack = 1e-9 * std::max(1.0, times.back() - times.front());
  if (t < times.front() - slack || t > times.back() + slack)
    throw DomainError("RotatingFrame: t outside frame grid");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const size_t hi = static_cast<size_t>(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

RotatingFrame build_frame(const LindbladModel& model, std::vector<double> time_grid) {
  if (time_grid.size() < 3)
    throw ArgumentError("build_frame: need at least three grid points");
  for (size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1]))
      throw ArgumentError("build_frame: grid must be strictly increasing");
  for (double t : time_grid) model.check_time(t);

  const int n = model.dim();
  RotatingFrame frame;
  frame.times = std::move(time_grid);
  frame.u.reserve(frame.times.size());
  frame.energies.reserve(frame.times.size());

  Matrix prev_vectors;  // eigenvector columns of the previous grid point
  for (size_t i = 0; i < frame.times.size(); ++i) {
    const Matrix h = model.hamiltonian(frame.times[i]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
    Eigen::VectorXd evals = es.eigenvalues();
    Matrix vecs = es.eigenvectors();

    double min_gap = 1e300;
    for (int a = 0; a + 1 < n; ++a) min_gap = std::min(min_gap, evals(a + 1) - evals(a));
    const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
    if (min_gap <= 1e-10 * scale)
      throw DegeneracyError("build_frame: H(t) level crossing near t=" +
                            std::to_string(frame.times[i]));

    if (i == 0) {
      for (int j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        vecs.col(j).cwiseAbs().maxCoeff(&imax);
        const Complex pivot = vecs(imax, j);
        if (std::abs(pivot) > 0.0) vecs.col(j) *= std::abs(pivot) / pivot;
      }
    } else {
      // match by overlap against the previous point, then transport the phase
      Matrix matched(n, n);
      Eigen::VectorXd matched_evals(n);
      std::vector<bool> used(static_cast<size_t>(n), false);
      for (int j = 0; j < n; ++j) {
        int best = -1;
        double best_mag = -1.0;
        for (int k = 0; k < n; ++k) {
          if (used[static_cast<size_t>(k)]) continue;
          const double mag = std::abs(prev_vectors.col(j).dot(vecs.col(k)));
          if (mag > best_mag) {
            best_mag = mag;
            best = k;
          }
        }
        if (best_mag < 0.5)
          throw DegeneracyError("build_frame: eigenvector continuity lost on [" +
                                std::to_string(frame.times[i - 1]) + ", " +
                                std::to_string(frame.times[i]) +
                                "] (crossing or grid too coarse)");
        used[static_cast<size_t>(best)] = true;
        const Complex ov = prev_vectors.col(j).dot(vecs.col(best));
        matched.col(j) = vecs.col(best) * (std::abs(ov) / ov);
        matched_evals(j) = evals(best);
      }
      vecs = std::move(matched);
      evals = std::move(matched_evals);
    }
    prev_vectors = vecs;
    frame.energies.push_back(evals);
    frame.u.push_back(vecs.adjoint());  // rows <E_n(t)|
  }

  // Z = i dU/dt U', central differences inside, second-order one-sided at ends.
  const size_t np = frame.times.size();
  frame.z.resize(np);
  auto dt = [&](size_t a, size_t b) { return frame.times[b] - frame.times[a]; };
  for (size_t i = 0; i < np; ++i) {
    Matrix du;
    if (i == 0) {
      const double h1 = dt(0, 1), h2 = dt(1, 2);
      // three-point forward difference on a possibly nonuniform grid
      const double a = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
      const double b = (h1 + h2) / (h1 * h2);
      const double c = -h1 / (h2 * (h1 + h2));
      du = a * frame.u[0] + b * frame.u[1] + c * frame.u[2];
    } else if (i == np - 1) {
      const double h1 = dt(np - 2, np - 1), h2 = dt(np - 3, np - 2);
      const double a = (2.0 * h1 + h2) / (h1 * (h1 + h2));
      const double b = -(h1 + h2) / (h1 * h2);
      const double c = h1 / (h2 * (h1 + h2));
      du = a * frame.u[np - 1] + b * frame.u[np - 2] + c * frame.u[np - 3];
    } else {
      const double hl = dt(i - 1, i), hr = dt(i, i + 1);
      // nonuniform central difference, exact for quadratics
      const double a = -hr / (hl * (hl + hr));
      const double b = (hr - hl) / (hl * hr);
      const double c = hl / (hr * (hl + hr));
      du = a * frame.u[i - 1] + b * frame.u[i] + c * frame.u[i + 1];
    }
    frame.z[i] = kI * du * frame.u[i].adjoint();
  }
  return frame;
}

// The rotated model lives on the frame's grid span, which may be a sub-window
// of the source model domain.
LindbladModel rotate_model(const LindbladModel& model, const RotatingFrame& frame) {
  const int n = model.dim();
  const size_t np = frame.times.size();

  std::vector<Matrix> ham(np);
  for (size_t i = 0; i < np; ++i) {
    Matrix diag = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) diag(j, j) = frame.energies[i](j);
    const Matrix hz = diag + 0.5 * (frame.z[i] + frame.z[i].adjoint());
    ham[i] = hz;
  }
  std::vector<OperatorSchedule> jumps;
  for (size_t k = 0; k < model.n_jumps(); ++k) {
    std::vector<Matrix> samples(np);
    for (size_t i = 0; i < np; ++i)
      samples[i] = frame.u[i] * model.jump_op(k, frame.times[i]) * frame.u[i].adjoint();
    jumps.push_back(OperatorSchedule::piecewise_linear(frame.times, std::move(samples)));
  }
  return LindbladModel(n, OperatorSchedule::piecewise_linear(frame.times, std::move(ham)),
                       std::move(jumps), {frame.times.front(), frame.times.back()});
}

EffectiveHamiltonian build_rotated_effective(const LindbladModel& model,
                                             const RotatingFrame& frame, double t) {
  return build_effective_hamiltonian(rotate_model(model, frame), t);
}

double high_order_gamma(const LindbladModel& model, const RotatingFrame& frame,
                        double t, int m, int n) {
  const LindbladModel rotated = rotate_model(model, frame);
  // Tracking grid: a short window of frame points around t.
  const size_t center = frame.index_at(t);
  const size_t lo = center >= 2 ? center - 2 : 0;
  const size_t hi = std::min(lo + 4, frame.times.size() - 1);
  std::vector<double> grid(frame.times.begin() + static_cast<long>(lo),
                           frame.times.begin() + static_cast<long>(hi) + 1);
  EigenPath path = track_paths(rotated, std::move(grid));
  // Keep the central difference inside the sampled window.
  const double span = frame.times[hi] - frame.times[lo];
  const double h = std::min(kDefaultFdStep, 1e-3 * span);
  return gamma_mn(path, t, m, n, GammaForm::RightDerivative, h);
}

}  // namespace adiabat
