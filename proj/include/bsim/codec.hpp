#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bsim/bsi.hpp"

namespace bsim::codec {

struct NormalRow {
    uint32_t position;
    uint64_t value;
    bool operator==(const NormalRow&) const = default;
};

// Row-format column: (position, value) pairs, zero values never materialized.
struct NormalRows {
    std::vector<NormalRow> rows;
    bool sorted = false;
    bool operator==(const NormalRows&) const = default;
};

// One bit-extraction pass per row.
Bsi encode_straightforward(const NormalRows& rows);
// Block-at-a-time encode for position-sorted rows; output identical to the
// straightforward path, bit-sets land in adjacent containers.
Bsi encode_presorted(const NormalRows& rows);

// Per-row slice probing; emits rows for mask positions with nonzero value.
// The out-parameter forms reuse the row buffer's capacity.
NormalRows decode_straightforward(const Bsi& x, const Bitmap& mask);
void decode_straightforward(const Bsi& x, const Bitmap& mask, NormalRows& out);
// Container-at-a-time decode: extracts each slice's masked bits into a value
// buffer, then emits the nonzero buffer entries. Same output, fewer scattered
// probes.
NormalRows decode_per_bitmap(const Bsi& x, const Bitmap& mask);
void decode_per_bitmap(const Bsi& x, const Bitmap& mask, NormalRows& out);

// File format: one text header line `sorted=0|1`, then little-endian
// (u32 position, u64 value) records.
void write_rows(std::ostream& out, const NormalRows& rows);
NormalRows read_rows(std::istream& in);

} // namespace bsim::codec
