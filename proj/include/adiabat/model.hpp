#pragma once

#include <map>
#include <string>
#include <vector>

#include "adiabat/numerics.hpp"

namespace adiabat {

// Time-dependent operator H(t) or L_k(t): a constant matrix, linear
// interpolation between samples on a strictly increasing time grid, or a named
// parametric form from the builtin registry.
class OperatorSchedule {
 public:
  enum class Kind { Constant, PiecewiseLinear, Builtin };

  static OperatorSchedule constant(Matrix m);
  static OperatorSchedule piecewise_linear(std::vector<double> times,
                                           std::vector<Matrix> samples);
  static OperatorSchedule builtin(const std::string& name,
                                  std::map<std::string, double> params);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  Matrix at(double t) const;

  // accessors used by the serializer
  const Matrix& constant_matrix() const { return constant_; }
  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<Matrix>& samples() const { return samples_; }
  const std::string& builtin_name() const { return builtin_name_; }
  const std::map<std::string, double>& builtin_params() const { return params_; }

 private:
  OperatorSchedule() = default;
  Kind kind_ = Kind::Constant;
  int dim_ = 0;
  Matrix constant_;
  std::vector<double> times_;
  std::vector<Matrix> samples_;
  std::string builtin_name_;
  std::map<std::string, double> params_;
};

// Names understood by OperatorSchedule::builtin.
//   "rotating_field_spin": params {theta, omega}; 2x2 field Hamiltonian
//     sin(theta)cos(omega t) sx + sin(theta)sin(omega t) sy + cos(theta) sz.
bool is_builtin_schedule(const std::string& name);

struct TimeDomain {
  double start = 0.0;
  double end = 1.0;
};

class LindbladModel {
 public:
  LindbladModel(int dim, OperatorSchedule hamiltonian,
                std::vector<OperatorSchedule> jump_ops, TimeDomain domain);

  int dim() const { return dim_; }
  const TimeDomain& t_domain() const { return domain_; }
  const OperatorSchedule& hamiltonian_schedule() const { return hamiltonian_; }
  const std::vector<OperatorSchedule>& jump_schedules() const { return jumps_; }

  Matrix hamiltonian(double t) const;
  Matrix jump_op(size_t k, double t) const;
  size_t n_jumps() const { return jumps_.size(); }

  void check_time(double t) const;  // throws DomainError

 private:
  int dim_;
  OperatorSchedule hamiltonian_;
  std::vector<OperatorSchedule> jumps_;
  TimeDomain domain_;
};

class DensityMatrix {
 public:
  // Validates hermiticity, unit trace and tolerance-positivity.
  explicit DensityMatrix(Matrix rho, double herm_tol = 1e-10,
                         double trace_tol = 1e-10, double eig_floor = -1e-8);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }

 private:
  Matrix rho_;
};

struct ValidationReport {
  bool passed = false;
  double max_hermiticity_violation = 0.0;
  std::vector<std::string> failures;
};

// Samples the model domain uniformly and checks H(t) hermiticity (1e-12),
// dimension consistency and finiteness of every schedule.
ValidationReport validate_model(const LindbladModel& model, int n_samples);

// Dissipator contribution to i d(rho)/dt:
//   -(i/2) sum_k { Lk'Lk rho + rho Lk'Lk - 2 Lk rho Lk' }.
Matrix dissipator_apply(const LindbladModel& model, double t, const Matrix& rho);

// Full generator: [H, rho] + dissipator. The physical flow is
// d(rho)/dt = -i * liouvillian_apply(model, t, rho).
Matrix liouvillian_apply(const LindbladModel& model, double t, const Matrix& rho);

// JSON model description (schema documented in the README).
std::string model_to_json(const LindbladModel& model, int indent = 2);
LindbladModel model_from_json(const std::string& text);
LindbladModel model_from_json_file(const std::string& path);

}  // namespace adiabat
