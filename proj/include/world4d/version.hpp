#pragma once

namespace world4d {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace world4d
