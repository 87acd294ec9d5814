#pragma once

#include <cstdint>

namespace tagsync {

/// Local clock reading, in oscillator ticks.
using Ticks = std::int64_t;

/// Reference (reader) time, in microseconds since scenario start.
using Micros = std::int64_t;

}  // namespace tagsync
