#pragma once

namespace uosf {

inline constexpr const char* software_name = "uosf";
inline constexpr const char* software_version = "0.1.0";

}  // namespace uosf
