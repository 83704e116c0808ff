#pragma once

namespace copycat {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr unsigned kCheckpointVersion = 1;

}  // namespace copycat
