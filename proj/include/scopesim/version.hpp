#pragma once

namespace scopesim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scopesim
