#pragma once

namespace adiabat {

// Full command-line surface. Exit codes: 0 success, 1 I/O or numeric failure,
// 2 model-degeneracy abort.
int run_cli(int argc, const char* const* argv);

}  // namespace adiabat
