#include "adiabat/propagation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>

namespace adiabat {

void Trajectory::validate(double trace_tol, double eig_floor) const {
  for (size_t i = 0; i < states.size(); ++i) {
    const Matrix& rho = states[i];
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > trace_tol)
      throw NumericError("Trajectory: trace drift at t=" + std::to_string(times[i]));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eig_floor)
      throw NumericError("Trajectory: negative population at t=" +
                         std::to_string(times[i]));
  }
}

std::uint64_t model_hash(const LindbladModel& model) {
  const std::string text = model_to_json(model, -1);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::vector<double> uniform_samples(double t0, double t1, int n_samples) {
  if (n_samples < 1) throw ArgumentError("propagate: n_samples >= 1 required");
  std::vector<double> out(static_cast<size_t>(n_samples) + 1);
  for (int i = 0; i <= n_samples; ++i)
    out[static_cast<size_t>(i)] = t0 + (t1 - t0) * i / n_samples;
  return out;
}

}  // namespace

Trajectory propagate_master(const LindbladModel& model, const DensityMatrix& rho0,
                            double t0, double t1, const IntegratorConfig& cfg,
                            int n_samples) {
  model.check_time(t0);
  model.check_time(t1);
  if (rho0.dim() != model.dim())
    throw DimensionError("propagate_master: state dimension mismatch");
  const auto samples = uniform_samples(t0, t1, n_samples);
  auto rhs = [&](double t, const Vector& y) {
    return embed_density((-kI * liouvillian_apply(model, t, extract_density(y))).eval());
  };
  const OdeTrajectory raw =
      integrate_ode(rhs, embed_density(rho0), t0, t1, cfg, samples);
  Trajectory traj;
  traj.times = raw.times;
  traj.states.reserve(raw.states.size());
  for (const auto& y : raw.states) traj.states.push_back(extract_density(y));
  traj.config = cfg;
  traj.model_hash = model_hash(model);
  return traj;
}

Trajectory propagate_embedded(const LindbladModel& model, const DensityMatrix& rho0,
                              double t0, double t1, const IntegratorConfig& cfg,
                              int n_samples) {
  model.check_time(t0);
  model.check_time(t1);
  if (rho0.dim() != model.dim())
    throw DimensionError("propagate_embedded: state dimension mismatch");
  const auto samples = uniform_samples(t0, t1, n_samples);
  auto rhs = [&](double t, const Vector& y) {
    return (-kI * (build_effective_hamiltonian(model, t).matrix * y)).eval();
  };
  const OdeTrajectory raw =
      integrate_ode(rhs, embed_density(rho0), t0, t1, cfg, samples);
  Trajectory traj;
  traj.times = raw.times;
  traj.states.reserve(raw.states.size());
  for (const auto& y : raw.states) traj.states.push_back(extract_density(y));
  traj.config = cfg;
  traj.model_hash = model_hash(model);
  return traj;
}

namespace {

Matrix interpolate_state(const Trajectory& traj, double t) {
  const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  if (it == traj.times.begin()) return traj.states.front();
  if (it == traj.times.end()) return traj.states.back();
  const size_t hi = static_cast<size_t>(it - traj.times.begin());
  const size_t lo = hi - 1;
  const double w = (t - traj.times[lo]) / (traj.times[hi] - traj.times[lo]);
  return (1.0 - w) * traj.states[lo] + w * traj.states[hi];
}

}  // namespace

ComparisonReport compare_trajectories(const Trajectory& a, const Trajectory& b) {
  if (a.times.empty() || b.times.empty())
    throw ArgumentError("compare_trajectories: empty trajectory");
  const double lo = std::max(a.times.front(), b.times.front());
  const double hi = std::min(a.times.back(), b.times.back());
  if (!(hi >= lo))
    throw DomainError("compare_trajectories: disjoint time domains");

  ComparisonReport report;
  report.resampled = a.times != b.times;
  for (size_t i = 0; i < a.times.size(); ++i) {
    const double t = a.times[i];
    if (t < lo || t > hi) continue;
    const double d = report.resampled
                         ? trace_distance(a.states[i], interpolate_state(b, t))
                         : trace_distance(a.states[i], b.states[i]);
    report.times.push_back(t);
    report.distances.push_back(d);
    if (d >= report.max_distance) {
      report.max_distance = d;
      report.at_time = t;
    }
  }
  return report;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out,
                          const std::string& label) {
  const auto n = traj.states.empty() ? 0 : traj.states.front().rows();
  out << (label.empty() ? "" : "propagator,") << "time";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out << ",rho_" << i << '_' << j << "_re,rho_" << i << '_' << j << "_im";
  out << '\n';
  char buf[64];
  for (size_t k = 0; k < traj.times.size(); ++k) {
    if (!label.empty()) out << label << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times[k]);
    out << buf;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", traj.states[k](i, j).real(),
                      traj.states[k](i, j).imag());
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace adiabat
