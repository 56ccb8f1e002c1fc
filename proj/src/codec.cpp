#include "bsim/codec.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "bsim/error.hpp"

namespace bsim::codec {

namespace {

void reject_zero_values(const NormalRows& rows) {
    for (const NormalRow& r : rows.rows)
        if (r.value == 0)
            throw Error(Errc::InvalidArgument,
                        "zero-valued row at position " + std::to_string(r.position));
}

} // namespace

Bsi encode_straightforward(const NormalRows& rows) {
    reject_zero_values(rows);
    std::vector<std::pair<uint32_t, uint64_t>> pairs;
    pairs.reserve(rows.rows.size());
    for (const NormalRow& r : rows.rows) pairs.emplace_back(r.position, r.value);
    return Bsi::from_pairs(pairs);
}

Bsi encode_presorted(const NormalRows& rows) {
    if (!rows.sorted) throw Error(Errc::UnsortedInput, "pre-sorted encode requires sorted rows");
    reject_zero_values(rows);
    int64_t prev = -1;
    for (const NormalRow& r : rows.rows) {
        if (int64_t(r.position) <= prev)
            throw Error(Errc::UnsortedInput, "rows not strictly increasing by position");
        prev = r.position;
    }

    // Walk rows block by block (one 16-bit key span per block), accumulating
    // each slice's low halves, then flush whole containers at once.
    std::array<std::vector<uint16_t>, Bsi::kMaxSlices> lows;
    std::array<BitmapBuilder, Bsi::kMaxSlices> builders;
    int width = 0;
    int32_t block_key = -1;

    auto flush_block = [&]() {
        if (block_key < 0) return;
        for (int i = 0; i < width; ++i) {
            if (!lows[size_t(i)].empty()) {
                builders[size_t(i)].append_block(uint16_t(block_key), lows[size_t(i)]);
                lows[size_t(i)].clear();
            }
        }
    };

    for (const NormalRow& r : rows.rows) {
        int32_t key = int32_t(r.position >> 16);
        if (key != block_key) {
            flush_block();
            block_key = key;
        }
        uint64_t v = r.value;
        uint16_t low = uint16_t(r.position & 0xFFFF);
        while (v) {
            int i = std::countr_zero(v);
            lows[size_t(i)].push_back(low);
            width = std::max(width, i + 1);
            v &= v - 1;
        }
    }
    flush_block();

    std::vector<Bitmap> slices;
    slices.reserve(size_t(width));
    for (int i = 0; i < width; ++i) slices.push_back(builders[size_t(i)].finish());
    return Bsi::from_slices(std::move(slices));
}

namespace {

// rows are emitted through a raw cursor; the vector is sized to the mask
// upfront and truncated to the rows actually written
NormalRow* emit_begin(NormalRows& out, uint64_t upper_bound) {
    out.sorted = true;
    if (out.rows.size() < upper_bound) out.rows.resize(upper_bound);
    return out.rows.data();
}

void emit_end(NormalRows& out, NormalRow* cursor) {
    out.rows.resize(size_t(cursor - out.rows.data()));
}

} // namespace

void decode_straightforward(const Bsi& x, const Bitmap& mask, NormalRows& out) {
    NormalRow* dst = emit_begin(out, mask.cardinality());
    int s = x.slice_count();
    mask.for_each([&](uint32_t p) {
        uint64_t v = 0;
        for (int i = 0; i < s; ++i)
            if (x.slice(i).contains(p)) v |= uint64_t(1) << i;
        if (v != 0) *dst++ = {p, v};
    });
    emit_end(out, dst);
}

NormalRows decode_straightforward(const Bsi& x, const Bitmap& mask) {
    NormalRows out;
    decode_straightforward(x, mask, out);
    return out;
}

namespace {

// spreads the 8 bits of b into 8 byte lanes holding 0 or 1, lane L = bit L
inline uint64_t spread_byte(uint64_t b) {
    uint64_t x = (b * 0x0101010101010101ULL) & 0x8040201008040201ULL; // lane L keeps bit L
    return ((x + 0x00406070787C7E7FULL) >> 7) & 0x0101010101010101ULL; // lane to 0/1
}

// Deposit bit i of the values for every position in (slice container AND mask
// container) into buf, indexed by the low half of the position.
template <class Word>
void deposit_bits(const Container& slice, const Container& mask, Word bit, int slice_index,
                  std::vector<Word>& buf) {
    if (slice.is_bitset() && mask.is_bitset()) {
        const auto sw = slice.words(), mw = mask.words();
        if constexpr (sizeof(Word) == 1) {
            // byte-lane expansion: eight positions deposited per word op
            for (uint32_t w = 0; w < Container::kWords; ++w) {
                uint64_t bits = sw[w] & mw[w];
                if (!bits) continue;
                for (uint32_t k = 0; k < 8; ++k) {
                    uint64_t byte = (bits >> (8 * k)) & 0xFF;
                    if (!byte) continue;
                    size_t at = size_t(w) * 64 + k * 8;
                    uint64_t chunk;
                    std::memcpy(&chunk, buf.data() + at, 8);
                    chunk |= spread_byte(byte) << slice_index;
                    std::memcpy(buf.data() + at, &chunk, 8);
                }
            }
        } else {
            for (uint32_t w = 0; w < Container::kWords; ++w) {
                uint64_t bits = sw[w] & mw[w];
                while (bits) {
                    buf[w * 64 + uint32_t(std::countr_zero(bits))] |= bit;
                    bits &= bits - 1;
                }
            }
        }
    } else if (!slice.is_bitset()) {
        for (uint16_t v : slice.array())
            if (mask.contains(v)) buf[v] |= bit;
    } else {
        for (uint16_t v : mask.array())
            if (slice.contains(v)) buf[v] |= bit;
    }
}

// The value buffer is sized to the BSI's width so narrow metrics (the common
// case) stay cache resident: one byte per position up to 8 slices.
template <class Word>
void decode_with_buffer(const Bsi& x, const Bitmap& mask, NormalRows& out) {
    NormalRow* dst = emit_begin(out, mask.cardinality());
    int s = x.slice_count();
    std::vector<Word> buf(Container::kSlots, 0);

    for (const auto& entry : mask.entries()) {
        bool touched = false;
        for (int i = 0; i < s; ++i) {
            if (const Container* c = x.slice(i).container_for(entry.key)) {
                deposit_bits(*c, entry.container, Word(Word(1) << i), i, buf);
                touched = true;
            }
        }
        if (!touched) continue; // value 0 everywhere under this key
        uint32_t base = uint32_t(entry.key) << 16;
        // deposits were masked already, so the nonzero buffer entries are
        // exactly the rows to emit; sweep the buffer chunk-wise, clearing as
        // we go
        if (entry.container.is_bitset()) {
            constexpr uint32_t kChunk = sizeof(uint64_t) / sizeof(Word);
            constexpr uint64_t kZero = 0;
            for (uint32_t c = 0; c < Container::kSlots / kChunk; ++c) {
                uint64_t chunk;
                std::memcpy(&chunk, buf.data() + size_t(c) * kChunk, 8);
                if (chunk == 0) continue;
                uint32_t low0 = c * kChunk;
                for (uint32_t k = 0; k < kChunk; ++k) {
                    Word v = Word(chunk >> (8 * sizeof(Word) * k));
                    if (v != 0) *dst++ = {base | (low0 + k), uint64_t(v)};
                }
                std::memcpy(buf.data() + size_t(c) * kChunk, &kZero, 8);
            }
        } else {
            // sparse mask: walk its positions instead of the whole buffer
            for (uint16_t low : entry.container.array()) {
                Word v = buf[low];
                if (v != 0) {
                    *dst++ = {base | low, uint64_t(v)};
                    buf[low] = 0;
                }
            }
        }
    }
    emit_end(out, dst);
}

} // namespace

void decode_per_bitmap(const Bsi& x, const Bitmap& mask, NormalRows& out) {
    int s = x.slice_count();
    if (s <= 8) return decode_with_buffer<uint8_t>(x, mask, out);
    if (s <= 16) return decode_with_buffer<uint16_t>(x, mask, out);
    if (s <= 32) return decode_with_buffer<uint32_t>(x, mask, out);
    return decode_with_buffer<uint64_t>(x, mask, out);
}

NormalRows decode_per_bitmap(const Bsi& x, const Bitmap& mask) {
    NormalRows out;
    decode_per_bitmap(x, mask, out);
    return out;
}

void write_rows(std::ostream& out, const NormalRows& rows) {
    out << "sorted=" << (rows.sorted ? 1 : 0) << "\n";
    for (const NormalRow& r : rows.rows) {
        uint8_t rec[12];
        for (int i = 0; i < 4; ++i) rec[i] = uint8_t(r.position >> (8 * i));
        for (int i = 0; i < 8; ++i) rec[4 + i] = uint8_t(r.value >> (8 * i));
        out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
    if (!out) throw Error(Errc::IoError, "failed writing rows");
}

NormalRows read_rows(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error(Errc::Truncated, "missing rows header");
    NormalRows out;
    if (header == "sorted=1")
        out.sorted = true;
    else if (header == "sorted=0")
        out.sorted = false;
    else
        throw Error(Errc::Malformed, "bad rows header: " + header);
    uint8_t rec[12];
    while (in.read(reinterpret_cast<char*>(rec), sizeof rec)) {
        uint32_t p = 0;
        uint64_t v = 0;
        for (int i = 0; i < 4; ++i) p |= uint32_t(rec[i]) << (8 * i);
        for (int i = 0; i < 8; ++i) v |= uint64_t(rec[4 + i]) << (8 * i);
        out.rows.push_back({p, v});
    }
    if (in.gcount() != 0) throw Error(Errc::Truncated, "partial row record");
    return out;
}

} // namespace bsim::codec
