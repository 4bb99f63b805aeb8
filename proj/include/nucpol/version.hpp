#pragma once

namespace nucpol {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace nucpol
