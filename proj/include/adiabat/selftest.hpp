#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adiabat/model.hpp"
#include "adiabat/spectral.hpp"

namespace adiabat {

namespace testing {

// Deterministic generators shared by the selftest suites and the unit tests.
Matrix random_matrix(std::mt19937_64& rng, int n, double scale = 1.0);
Matrix random_hermitian(std::mt19937_64& rng, int n, double scale = 1.0);
DensityMatrix random_density(std::mt19937_64& rng, int n);
// Random model with a constant Hermitian Hamiltonian and n_jumps constant
// jump operators on the domain [0, 10].
LindbladModel random_model(std::mt19937_64& rng, int dim, int n_jumps);

// Composite eigensystem of a closed (jump-free) model built as tensor
// products of the tracked instantaneous eigenvectors of H(t). This resolves
// the composite zero cluster in its physical basis, so every mode pair with a
// nonzero gap carries a well-defined transition rate. Shared by the
// closed-system reduction suite and the acceptance tests.
EigenPath closed_composite_path(const LindbladModel& model,
                                std::vector<double> time_grid);

}  // namespace testing

struct SelftestOptions {
  std::uint64_t seed = 20240915;
  bool quick = false;
  // Test hook: flips the sign of the system-ancilla coupling term inside the
  // generator used by the oracle-equivalence suite. Must make that suite fail.
  bool inject_fault = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SuiteResult> suites;
  std::uint64_t seed = 0;
  bool all_passed() const {
    for (const auto& s : suites)
      if (!s.passed) return false;
    return true;
  }
};

// Randomized invariant suites: superoperator oracle equivalence,
// biorthonormality/completeness, agreement of the adiabaticity-rate forms,
// and the closed-system reduction.
SelftestReport run_selftest(const SelftestOptions& options);

}  // namespace adiabat
