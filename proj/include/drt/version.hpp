#pragma once

namespace drt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace drt
