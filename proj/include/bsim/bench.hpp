#pragma once

#include <cstdint>

#include "bsim/generator.hpp"

// Desk-scale comparisons between the row ("normal") format and the BSI
// format: storage bytes, aggregation time, and the two encode/decode method
// pairs. Both sides always compute on identical data and are checked for
// equal answers before any timing is reported.

namespace bsim::bench {

struct StorageReport {
    uint64_t rows = 0;
    uint64_t normal_bytes = 0; // 12 bytes per (u32, u64) row, uncompressed
    uint64_t bsi_bytes = 0;    // serialized BSI
    double ratio = 0;          // bsi / normal
};

StorageReport storage_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                               uint64_t seed);

struct TimedReport {
    uint64_t rows = 0;
    double baseline_ms = 0; // normal format / straightforward method
    double candidate_ms = 0; // BSI / optimized method
    double speedup = 0;      // baseline / candidate
    bool equal = false;      // answers matched
    int runs = 0;            // timed runs (after one warm-up)
};

// Two-day per-unit sum: hash aggregation over rows vs sumBSI.
TimedReport compute_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                             uint64_t seed, int runs);

// Row-to-BSI conversion: straightforward vs pre-sorted block encode.
TimedReport encode_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                            uint64_t seed, int runs);

// BSI-to-row conversion over a full mask: straightforward vs per-bitmap.
TimedReport decode_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                            uint64_t seed, int runs);

// End-to-end scorecard: row-based reference engine vs the BSI engine.
TimedReport scorecard_scenario(const gen::Params& params, int runs);

} // namespace bsim::bench
