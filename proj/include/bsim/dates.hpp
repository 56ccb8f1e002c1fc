#pragma once

#include <cstdint>
#include <string>

#include "bsim/error.hpp"

// Calendar dates are handled as day indexes (days since 1970-01-01, proleptic
// Gregorian); the external format is decimal YYYYMMDD.

namespace bsim::dates {

// DateBeforeEpoch error for dates before 1970-01-01; Malformed for impossible
// calendar dates.
int64_t day_index_from_yyyymmdd(uint32_t yyyymmdd);
uint32_t yyyymmdd_from_day_index(int64_t day);

int64_t parse_day(const std::string& text); // decimal YYYYMMDD
std::string format_day(int64_t day);

} // namespace bsim::dates
