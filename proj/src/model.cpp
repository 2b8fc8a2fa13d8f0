#include "adiabat/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace adiabat {

namespace {

using BuiltinEval =
    Matrix (*)(double, const std::map<std::string, double>&);

double require_param(const std::map<std::string, double>& params,
                     const std::string& key, const std::string& builtin) {
  auto it = params.find(key);
  if (it == params.end())
    throw ArgumentError("builtin schedule '" + builtin + "' needs parameter '" +
                        key + "'");
  return it->second;
}

// Basis order {g, e}: sz = diag(-1, +1), s+ = |e><g|, s- = |g><e|.
Matrix rotating_field_spin(double t, const std::map<std::string, double>& p) {
  const double theta = require_param(p, "theta", "rotating_field_spin");
  const double omega = require_param(p, "omega", "rotating_field_spin");
  const double phi = omega * t;
  const double s = std::sin(theta), c = std::cos(theta);
  Matrix h(2, 2);
  h(0, 0) = -c;
  h(0, 1) = s * std::exp(kI * phi);
  h(1, 0) = s * std::exp(-kI * phi);
  h(1, 1) = c;
  return h;
}

struct BuiltinDef {
  int dim;
  BuiltinEval eval;
};

const std::map<std::string, BuiltinDef>& builtin_registry() {
  static const std::map<std::string, BuiltinDef> registry = {
      {"rotating_field_spin", {2, &rotating_field_spin}},
  };
  return registry;
}

}  // namespace

bool is_builtin_schedule(const std::string& name) {
  return builtin_registry().count(name) > 0;
}

OperatorSchedule OperatorSchedule::constant(Matrix m) {
  if (m.rows() != m.cols())
    throw DimensionError("OperatorSchedule: constant matrix must be square");
  OperatorSchedule s;
  s.kind_ = Kind::Constant;
  s.dim_ = static_cast<int>(m.rows());
  s.constant_ = std::move(m);
  return s;
}

OperatorSchedule OperatorSchedule::piecewise_linear(std::vector<double> times,
                                                    std::vector<Matrix> samples) {
  if (times.size() < 2 || times.size() != samples.size())
    throw ArgumentError("OperatorSchedule: need >= 2 samples, one per time");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw ArgumentError("OperatorSchedule: sample times must be strictly increasing");
  const Eigen::Index n = samples.front().rows();
  for (const auto& m : samples)
    if (m.rows() != n || m.cols() != n)
      throw DimensionError("OperatorSchedule: inconsistent sample dimensions");
  OperatorSchedule s;
  s.kind_ = Kind::PiecewiseLinear;
  s.dim_ = static_cast<int>(n);
  s.times_ = std::move(times);
  s.samples_ = std::move(samples);
  return s;
}

OperatorSchedule OperatorSchedule::builtin(const std::string& name,
                                           std::map<std::string, double> params) {
  auto it = builtin_registry().find(name);
  if (it == builtin_registry().end())
    throw ArgumentError("OperatorSchedule: unknown builtin '" + name + "'");
  OperatorSchedule s;
  s.kind_ = Kind::Builtin;
  s.dim_ = it->second.dim;
  s.builtin_name_ = name;
  s.params_ = std::move(params);
  it->second.eval(0.0, s.params_);  // fail fast on missing parameters
  return s;
}

Matrix OperatorSchedule::at(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return constant_;
    case Kind::Builtin:
      return builtin_registry().at(builtin_name_).eval(t, params_);
    case Kind::PiecewiseLinear: {
      const double lo = times_.front(), hi = times_.back();
      const double slack = 1e-12 * std::max(1.0, hi - lo);
      if (t < lo - slack || t > hi + slack)
        throw DomainError("OperatorSchedule: t outside sampled range");
      t = std::clamp(t, lo, hi);
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      if (it == times_.begin()) ++it;
      if (it == times_.end()) --it;
      const size_t j = static_cast<size_t>(it - times_.begin());
      const size_t i = j - 1;
      const double w = (t - times_[i]) / (times_[j] - times_[i]);
      return (1.0 - w) * samples_[i] + w * samples_[j];
    }
  }
  throw Error("OperatorSchedule: unreachable");
}

LindbladModel::LindbladModel(int dim, OperatorSchedule hamiltonian,
                             std::vector<OperatorSchedule> jump_ops,
                             TimeDomain domain)
    : dim_(dim),
      hamiltonian_(std::move(hamiltonian)),
      jumps_(std::move(jump_ops)),
      domain_(domain) {
  if (dim_ <= 0) throw DimensionError("LindbladModel: dim must be positive");
  if (hamiltonian_.dim() != dim_)
    throw DimensionError("LindbladModel: Hamiltonian dimension mismatch");
  for (const auto& j : jumps_)
    if (j.dim() != dim_)
      throw DimensionError("LindbladModel: jump operator dimension mismatch");
  if (!(domain_.end > domain_.start))
    throw ArgumentError("LindbladModel: empty time domain");
}

void LindbladModel::check_time(double t) const {
  const double slack = 1e-12 * std::max(1.0, domain_.end - domain_.start);
  if (t < domain_.start - slack || t > domain_.end + slack)
    throw DomainError("LindbladModel: t=" + std::to_string(t) +
                      " outside domain [" + std::to_string(domain_.start) + ", " +
                      std::to_string(domain_.end) + "]");
}

Matrix LindbladModel::hamiltonian(double t) const { return hamiltonian_.at(t); }

Matrix LindbladModel::jump_op(size_t k, double t) const {
  return jumps_.at(k).at(t);
}

DensityMatrix::DensityMatrix(Matrix rho, double herm_tol, double trace_tol,
                             double eig_floor)
    : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
    throw DimensionError("DensityMatrix: matrix must be square");
  if (!all_finite(rho_)) throw NumericError("DensityMatrix: non-finite entries");
  if (hermiticity_defect(rho_) > herm_tol)
    throw NumericError("DensityMatrix: not Hermitian within tolerance");
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > trace_tol)
    throw NumericError("DensityMatrix: trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho_ + rho_.adjoint()));
  if (es.eigenvalues().minCoeff() < eig_floor)
    throw NumericError("DensityMatrix: negative eigenvalue below floor");
}

ValidationReport validate_model(const LindbladModel& model, int n_samples) {
  if (n_samples < 2) throw ArgumentError("validate_model: n_samples >= 2 required");
  ValidationReport report;
  const auto& dom = model.t_domain();
  for (int i = 0; i < n_samples; ++i) {
    const double t = dom.start + (dom.end - dom.start) * i / (n_samples - 1);
    Matrix h;
    try {
      h = model.hamiltonian(t);
    } catch (const Error& e) {
      report.failures.push_back(std::string("hamiltonian evaluation: ") + e.what());
      continue;
    }
    if (h.rows() != model.dim() || h.cols() != model.dim())
      report.failures.push_back("hamiltonian dimension mismatch at t=" +
                                std::to_string(t));
    if (!all_finite(h))
      report.failures.push_back("hamiltonian non-finite at t=" + std::to_string(t));
    report.max_hermiticity_violation =
        std::max(report.max_hermiticity_violation, hermiticity_defect(h));
    for (size_t k = 0; k < model.n_jumps(); ++k) {
      Matrix l;
      try {
        l = model.jump_op(k, t);
      } catch (const Error& e) {
        report.failures.push_back(std::string("jump evaluation: ") + e.what());
        continue;
      }
      if (l.rows() != model.dim() || l.cols() != model.dim())
        report.failures.push_back("jump operator " + std::to_string(k) +
                                  " dimension mismatch at t=" + std::to_string(t));
      if (!all_finite(l))
        report.failures.push_back("jump operator " + std::to_string(k) +
                                  " non-finite at t=" + std::to_string(t));
    }
  }
  if (report.max_hermiticity_violation > 1e-12)
    report.failures.push_back("hamiltonian hermiticity violation " +
                              std::to_string(report.max_hermiticity_violation));
  report.passed = report.failures.empty();
  return report;
}

Matrix dissipator_apply(const LindbladModel& model, double t, const Matrix& rho) {
  model.check_time(t);
  if (rho.rows() != model.dim() || rho.cols() != model.dim())
    throw DimensionError("dissipator_apply: state dimension mismatch");
  Matrix acc = Matrix::Zero(model.dim(), model.dim());
  for (size_t k = 0; k < model.n_jumps(); ++k) {
    const Matrix l = model.jump_op(k, t);
    const Matrix ldl = l.adjoint() * l;
    acc += ldl * rho + rho * ldl - 2.0 * (l * rho * l.adjoint());
  }
  return Complex(0.0, -0.5) * acc;
}

Matrix liouvillian_apply(const LindbladModel& model, double t, const Matrix& rho) {
  model.check_time(t);
  if (rho.rows() != model.dim() || rho.cols() != model.dim())
    throw DimensionError("liouvillian_apply: state dimension mismatch");
  const Matrix h = model.hamiltonian(t);
  return h * rho - rho * h + dissipator_apply(model, t, rho);
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw ArgumentError("model json: matrix literal must be a non-empty array");
  const size_t rows = j.size();
  const size_t cols = j.at(0).size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (row.size() != cols)
      throw ArgumentError("model json: ragged matrix literal");
    for (size_t k = 0; k < cols; ++k) {
      const auto& e = row.at(k);
      if (!e.is_array() || e.size() != 2)
        throw ArgumentError("model json: matrix entries must be [re, im] pairs");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

json schedule_to_json(const OperatorSchedule& s) {
  json j;
  switch (s.kind()) {
    case OperatorSchedule::Kind::Constant:
      j["kind"] = "constant";
      j["matrix"] = matrix_to_json(s.constant_matrix());
      break;
    case OperatorSchedule::Kind::PiecewiseLinear: {
      j["kind"] = "piecewise_linear";
      j["times"] = s.sample_times();
      json mats = json::array();
      for (const auto& m : s.samples()) mats.push_back(matrix_to_json(m));
      j["matrices"] = std::move(mats);
      break;
    }
    case OperatorSchedule::Kind::Builtin:
      j["kind"] = "builtin";
      j["name"] = s.builtin_name();
      j["params"] = s.builtin_params();
      break;
  }
  return j;
}

OperatorSchedule schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return OperatorSchedule::constant(matrix_from_json(j.at("matrix")));
  if (kind == "piecewise_linear") {
    std::vector<double> times = j.at("times").get<std::vector<double>>();
    std::vector<Matrix> mats;
    for (const auto& m : j.at("matrices")) mats.push_back(matrix_from_json(m));
    return OperatorSchedule::piecewise_linear(std::move(times), std::move(mats));
  }
  if (kind == "builtin")
    return OperatorSchedule::builtin(
        j.at("name").get<std::string>(),
        j.at("params").get<std::map<std::string, double>>());
  throw ArgumentError("model json: unknown schedule kind '" + kind + "'");
}

}  // namespace

std::string model_to_json(const LindbladModel& model, int indent) {
  json j;
  j["dim"] = model.dim();
  j["t_domain"] = {model.t_domain().start, model.t_domain().end};
  j["hamiltonian"] = schedule_to_json(model.hamiltonian_schedule());
  json jumps = json::array();
  for (const auto& l : model.jump_schedules()) jumps.push_back(schedule_to_json(l));
  j["jump_ops"] = std::move(jumps);
  return j.dump(indent);
}

LindbladModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("model json: parse failure: ") + e.what());
  }
  try {
    const int dim = j.at("dim").get<int>();
    const auto dom = j.at("t_domain").get<std::vector<double>>();
    if (dom.size() != 2)
      throw ArgumentError("model json: t_domain must be [start, end]");
    OperatorSchedule h = schedule_from_json(j.at("hamiltonian"));
    std::vector<OperatorSchedule> jumps;
    for (const auto& l : j.at("jump_ops")) jumps.push_back(schedule_from_json(l));
    return LindbladModel(dim, std::move(h), std::move(jumps), {dom[0], dom[1]});
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("model json: missing or bad field: ") + e.what());
  }
}

LindbladModel model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace adiabat
