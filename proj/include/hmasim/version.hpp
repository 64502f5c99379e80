#pragma once

namespace hmasim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hmasim
