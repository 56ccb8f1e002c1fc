#pragma once

#include <cstdint>
#include <string>

#include "bsim/error.hpp"

namespace bsim::fixedpoint {

// Parses a non-negative decimal literal and scales it by a power-of-ten
// factor, rounding half away from zero on the dropped digits. Exact: never
// routes through floating point.
uint64_t parse_scaled(const std::string& text, uint64_t scale);

// Renders a scaled integer back to a decimal string (inverse up to rounding).
std::string format_scaled(uint64_t value, uint64_t scale);

} // namespace bsim::fixedpoint
