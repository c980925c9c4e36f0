#pragma once

namespace tentlab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace tentlab
