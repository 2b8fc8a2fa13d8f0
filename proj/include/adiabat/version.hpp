#pragma once

namespace adiabat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace adiabat
