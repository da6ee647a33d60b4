#pragma once

namespace vmass {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vmass
