#pragma once

#include <cstddef>
#include <cstdint>

namespace bsim::detail {

// CRC-32 (IEEE 802.3 polynomial, reflected).
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

} // namespace bsim::detail
