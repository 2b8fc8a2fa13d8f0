#pragma once

#include <stdexcept>
#include <string>

namespace adiabat {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or size mismatch (non-square input, incompatible dimensions,
// vector length not a perfect square, degenerate polynomial degree).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite entries, failed residual checks, vanishing denominators.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Evaluation time outside a schedule or model domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Adaptive integrator step underflow; carries the failing time.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& msg, double t) : Error(msg), time(t) {}
  double time;
};

// Degenerate or near-degenerate spectrum where a nondegenerate one is required.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Eigenpair continuity tracking broke down; carries the failing interval.
class TrackingError : public Error {
 public:
  TrackingError(const std::string& msg, double a, double b)
      : Error(msg), t_lo(a), t_hi(b) {}
  double t_lo;
  double t_hi;
};

// Matrix is defective (biorthogonalization impossible).
class NonDiagonalizableError : public Error {
 public:
  using Error::Error;
};

// Invalid argument combination (e.g. m == n where a distinct pair is required).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// File / filesystem failures surfaced by the CLI.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace adiabat
