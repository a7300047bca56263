#pragma once

namespace plurispec {

inline constexpr const char* kVersion = "plurispec 0.1.0";

} // namespace plurispec
