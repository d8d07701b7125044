#pragma once

namespace bipgo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bipgo
