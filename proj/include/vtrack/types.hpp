#pragma once

#include <cstdint>
#include <limits>

namespace vtrack {

// Virtual time in integer milliseconds. Nothing in the simulator uses
// floating-point time.
using Millis = std::int64_t;

inline constexpr Millis kNever = std::numeric_limits<Millis>::max();

} // namespace vtrack
