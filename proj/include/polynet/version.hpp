#pragma once

namespace polynet {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace polynet
