#pragma once

namespace alcurate {

inline constexpr const char* kToolName = "alcurate";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace alcurate
