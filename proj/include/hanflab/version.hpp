#pragma once

namespace hanflab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hanflab
