#include "bsim/bsi.hpp"

#include <algorithm>
#include <bit>

#include "bsim/detail/bytes.hpp"

namespace bsim {

namespace {

const Bitmap& empty_bitmap() {
    static const Bitmap kEmpty;
    return kEmpty;
}

const Bitmap& slice_or_empty(const Bsi& x, int i) {
    return i < x.slice_count() ? x.slice(i) : empty_bitmap();
}

void trim(std::vector<Bitmap>& slices) {
    while (!slices.empty() && slices.back().empty()) slices.pop_back();
}

// Ripple-carry addition over whole slices; max_width limits the result
// (64 for public addition, wider during multiply accumulation).
std::vector<Bitmap> add_slices(std::span<const Bitmap> x, std::span<const Bitmap> y,
                               size_t max_width) {
    size_t s = std::max(x.size(), y.size());
    std::vector<Bitmap> out;
    out.reserve(s + 1);
    Bitmap carry;
    for (size_t i = 0; i < s; ++i) {
        const Bitmap& a = i < x.size() ? x[i] : empty_bitmap();
        const Bitmap& b = i < y.size() ? y[i] : empty_bitmap();
        Bitmap axb = a ^ b;
        out.push_back(axb ^ carry);
        carry = (a & b) | (axb & carry);
    }
    if (!carry.empty()) {
        if (s >= max_width) throw Error(Errc::Overflow, "sum exceeds 64-bit values");
        out.push_back(std::move(carry));
    }
    trim(out);
    return out;
}

Bitmap less_than_raw(const Bsi& x, const Bsi& y) {
    int s = std::max(x.slice_count(), y.slice_count());
    Bitmap lt;
    for (int i = 0; i < s; ++i) {
        const Bitmap& xi = slice_or_empty(x, i);
        const Bitmap& yi = slice_or_empty(y, i);
        lt = andnot(yi | lt, xi) | (yi & lt);
    }
    return lt;
}

Bitmap not_equal_raw(const Bsi& x, const Bsi& y) {
    int s = std::max(x.slice_count(), y.slice_count());
    Bitmap ne;
    for (int i = 0; i < s; ++i) ne = ne | (slice_or_empty(x, i) ^ slice_or_empty(y, i));
    return ne;
}

// Equal operator scan: start from the rows present in x, clear every row
// where some slice differs.
Bitmap equal_scan(const Bsi& x, const Bsi& y) {
    int s = std::max(x.slice_count(), y.slice_count());
    Bitmap eq = x.nonzero();
    for (int i = 0; i < s && !eq.empty(); ++i)
        eq = andnot(eq, slice_or_empty(x, i) ^ slice_or_empty(y, i));
    return eq;
}

} // namespace

// --- Bsi ---------------------------------------------------------------------

Bsi Bsi::from_pairs(std::span<const std::pair<uint32_t, uint64_t>> pairs) {
    std::vector<uint32_t> seen;
    seen.reserve(pairs.size());
    for (const auto& [pos, value] : pairs) {
        (void)value;
        seen.push_back(pos);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw Error(Errc::DuplicatePosition, "duplicate position in BSI input");

    std::vector<std::vector<uint32_t>> bits(kMaxSlices);
    int width = 0;
    for (const auto& [pos, value] : pairs) {
        uint64_t v = value;
        while (v) {
            int i = std::countr_zero(v);
            bits[size_t(i)].push_back(pos);
            width = std::max(width, i + 1);
            v &= v - 1;
        }
    }
    Bsi out;
    out.slices_.reserve(size_t(width));
    for (int i = 0; i < width; ++i) {
        std::sort(bits[size_t(i)].begin(), bits[size_t(i)].end());
        out.slices_.push_back(Bitmap::from_sorted(bits[size_t(i)]));
    }
    trim(out.slices_);
    return out;
}

Bsi Bsi::from_slices(std::vector<Bitmap> slices) {
    trim(slices);
    if (slices.size() > kMaxSlices) throw Error(Errc::Overflow, "BSI wider than 64 slices");
    Bsi out;
    out.slices_ = std::move(slices);
    return out;
}

uint64_t Bsi::get(uint32_t pos) const {
    uint64_t v = 0;
    for (size_t i = 0; i < slices_.size(); ++i)
        if (slices_[i].contains(pos)) v |= uint64_t(1) << i;
    return v;
}

Bitmap Bsi::nonzero() const {
    Bitmap nz;
    for (const Bitmap& s : slices_) nz = nz | s;
    return nz;
}

uint64_t Bsi::sum() const {
    unsigned __int128 total = 0;
    for (size_t i = 0; i < slices_.size(); ++i)
        total += (unsigned __int128)(slices_[i].cardinality()) << i;
    if (total > (unsigned __int128)UINT64_MAX)
        throw Error(Errc::Overflow, "BSI sum exceeds 64 bits");
    return uint64_t(total);
}

uint64_t Bsi::count() const { return nonzero().cardinality(); }

uint64_t Bsi::max_value() const {
    if (empty()) throw Error(Errc::EmptyInput, "max of empty BSI");
    Bitmap candidates = nonzero();
    uint64_t v = 0;
    for (int i = slice_count() - 1; i >= 0; --i) {
        Bitmap with = candidates & slices_[size_t(i)];
        if (!with.empty()) {
            v |= uint64_t(1) << i;
            candidates = std::move(with);
        }
    }
    return v;
}

uint64_t Bsi::min_value() const {
    if (empty()) throw Error(Errc::EmptyInput, "min of empty BSI");
    Bitmap candidates = nonzero();
    uint64_t v = 0;
    for (int i = slice_count() - 1; i >= 0; --i) {
        Bitmap without = andnot(candidates, slices_[size_t(i)]);
        if (!without.empty()) {
            candidates = std::move(without);
        } else {
            v |= uint64_t(1) << i;
        }
    }
    return v;
}

size_t Bsi::byte_size_estimate() const {
    size_t n = 1;
    for (const Bitmap& s : slices_) n += 4 + s.byte_size_estimate();
    return n;
}

void Bsi::serialize(std::vector<uint8_t>& out) const {
    detail::ByteWriter w(out);
    w.u8(uint8_t(slices_.size()));
    for (const Bitmap& s : slices_) {
        std::vector<uint8_t> payload = s.serialize();
        w.u32(uint32_t(payload.size()));
        w.bytes(payload.data(), payload.size());
    }
}

std::vector<uint8_t> Bsi::serialize() const {
    std::vector<uint8_t> out;
    serialize(out);
    return out;
}

Bsi Bsi::deserialize(std::span<const uint8_t> in) {
    detail::ByteReader r(in);
    uint8_t count = r.u8();
    if (count > kMaxSlices) throw Error(Errc::Malformed, "BSI wider than 64 slices");
    std::vector<Bitmap> slices;
    slices.reserve(count);
    for (uint8_t i = 0; i < count; ++i) {
        uint32_t len = r.u32();
        slices.push_back(Bitmap::deserialize(r.bytes(len)));
    }
    if (!r.done()) throw Error(Errc::Malformed, "trailing bytes after BSI");
    if (count > 0 && slices.back().empty())
        throw Error(Errc::Malformed, "trailing empty slice");
    Bsi out;
    out.slices_ = std::move(slices);
    return out;
}

// --- BinaryBsi -----------------------------------------------------------------

BinaryBsi BinaryBsi::from_bsi(const Bsi& x) {
    if (x.slice_count() > 1) throw Error(Errc::NotBinary, "BSI has more than one slice");
    return BinaryBsi(x.slice_count() == 1 ? x.slice(0) : Bitmap{});
}

Bsi BinaryBsi::to_bsi() const {
    std::vector<Bitmap> slices;
    if (!bits_.empty()) slices.push_back(bits_);
    return Bsi::from_slices(std::move(slices));
}

// --- arithmetic ------------------------------------------------------------------

Bsi bsi_add(const Bsi& x, const Bsi& y) {
    return Bsi::from_slices(add_slices(x.slices(), y.slices(), Bsi::kMaxSlices));
}

Bsi bsi_subtract(const Bsi& x, const Bsi& y) {
    int s = std::max(x.slice_count(), y.slice_count());
    std::vector<Bitmap> out;
    out.reserve(size_t(s));
    Bitmap borrow;
    for (int i = 0; i < s; ++i) {
        const Bitmap& a = slice_or_empty(x, i);
        const Bitmap& b = slice_or_empty(y, i);
        Bitmap axb = a ^ b;
        out.push_back(axb ^ borrow);
        borrow = andnot(b | borrow, a) | (b & borrow);
    }
    if (!borrow.empty())
        throw Error(Errc::Underflow,
                    "subtraction underflows at " + std::to_string(borrow.cardinality()) + " positions",
                    borrow.cardinality());
    return Bsi::from_slices(std::move(out));
}

Bsi bsi_multiply_binary(const Bsi& x, const BinaryBsi& mask) {
    std::vector<Bitmap> out;
    out.reserve(size_t(x.slice_count()));
    for (int i = 0; i < x.slice_count(); ++i) out.push_back(x.slice(i) & mask.bits());
    return Bsi::from_slices(std::move(out));
}

Bsi bsi_multiply(const Bsi& x, const Bsi& y) {
    // shift-add over y's slices; O(s1*s2) slice operations
    constexpr size_t kWide = 2 * Bsi::kMaxSlices + 1;
    std::vector<Bitmap> acc;
    for (int i = 0; i < y.slice_count(); ++i) {
        const Bitmap& yi = y.slice(i);
        if (yi.empty()) continue;
        std::vector<Bitmap> partial(static_cast<size_t>(i)); // low slices shifted out
        for (int j = 0; j < x.slice_count(); ++j) partial.push_back(x.slice(j) & yi);
        trim(partial);
        acc = add_slices(acc, partial, kWide);
    }
    if (acc.size() > Bsi::kMaxSlices) throw Error(Errc::Overflow, "product exceeds 64-bit values");
    return Bsi::from_slices(std::move(acc));
}

// --- comparison -----------------------------------------------------------------

BinaryBsi bsi_compare(const Bsi& x, const Bsi& y, CmpOp op, CmpMode mode) {
    if (mode == CmpMode::Strict) {
        Bitmap both = x.nonzero() & y.nonzero();
        switch (op) {
            case CmpOp::Lt: return BinaryBsi(less_than_raw(x, y) & both);
            case CmpOp::Gt: return BinaryBsi(less_than_raw(y, x) & both);
            case CmpOp::Eq: return BinaryBsi(equal_scan(x, y));
            case CmpOp::Ne: return BinaryBsi(not_equal_raw(x, y) & both);
            case CmpOp::Le: return BinaryBsi(equal_scan(x, y) | (less_than_raw(x, y) & both));
            case CmpOp::Ge: return BinaryBsi(equal_scan(x, y) | (less_than_raw(y, x) & both));
        }
    } else {
        Bitmap support = x.nonzero() | y.nonzero();
        switch (op) {
            case CmpOp::Lt: return BinaryBsi(less_than_raw(x, y) & support);
            case CmpOp::Gt: return BinaryBsi(less_than_raw(y, x) & support);
            case CmpOp::Eq: return BinaryBsi(andnot(support, not_equal_raw(x, y)));
            case CmpOp::Ne: return BinaryBsi(not_equal_raw(x, y) & support);
            case CmpOp::Le: return BinaryBsi(andnot(support, less_than_raw(y, x)));
            case CmpOp::Ge: return BinaryBsi(andnot(support, less_than_raw(x, y)));
        }
    }
    throw Error(Errc::InvalidArgument, "bad comparison op");
}

BinaryBsi bsi_compare_scalar(const Bsi& x, CmpOp op, uint64_t k) {
    Bitmap universe = x.nonzero();
    int width = std::max(x.slice_count(), k ? 64 - std::countl_zero(k) : 0);
    Bitmap lt; // x < k on bits scanned so far
    Bitmap eq = universe;
    for (int i = 0; i < width; ++i) {
        const Bitmap& xi = slice_or_empty(x, i);
        if ((k >> i) & 1) {
            lt = andnot(universe, xi) | (lt & xi);
            eq = eq & xi;
        } else {
            lt = andnot(lt, xi);
            eq = andnot(eq, xi);
        }
    }
    switch (op) {
        case CmpOp::Lt: return BinaryBsi(std::move(lt));
        case CmpOp::Eq: return BinaryBsi(std::move(eq));
        case CmpOp::Ne: return BinaryBsi(andnot(universe, eq));
        case CmpOp::Le: return BinaryBsi(lt | eq);
        case CmpOp::Gt: return BinaryBsi(andnot(universe, lt | eq));
        case CmpOp::Ge: return BinaryBsi(andnot(universe, lt));
    }
    throw Error(Errc::InvalidArgument, "bad comparison op");
}

Bsi bsi_add_scalar(const Bsi& x, uint64_t k) {
    if (x.empty() || k == 0) return x;
    Bitmap universe = x.nonzero();
    std::vector<Bitmap> constant;
    for (int i = 0; i < 64; ++i) {
        if ((k >> i) & 1) {
            constant.resize(size_t(i) + 1);
            constant[size_t(i)] = universe;
        }
    }
    return bsi_add(x, Bsi::from_slices(std::move(constant)));
}

// --- aggregates ------------------------------------------------------------------

namespace {

Bsi max_pair(const Bsi& x, const Bsi& y) {
    BinaryBsi gt = bsi_compare(x, y, CmpOp::Gt, CmpMode::Total);
    BinaryBsi le = bsi_compare(x, y, CmpOp::Le, CmpMode::Total);
    return bsi_add(bsi_multiply_binary(x, gt), bsi_multiply_binary(y, le));
}

} // namespace

BinaryBsi bsi_distinct_pos(std::span<const Bsi> inputs) {
    if (inputs.empty()) throw Error(Errc::EmptyInput, "aggregate of no BSIs");
    Bitmap acc;
    for (const Bsi& x : inputs) acc = acc | x.nonzero();
    return BinaryBsi(std::move(acc));
}

Bsi bsi_agg(BsiAgg kind, std::span<const Bsi> inputs) {
    if (inputs.empty()) throw Error(Errc::EmptyInput, "aggregate of no BSIs");
    if (kind == BsiAgg::DistinctPos) return bsi_distinct_pos(inputs).to_bsi();
    Bsi acc = inputs[0];
    for (size_t i = 1; i < inputs.size(); ++i) {
        switch (kind) {
            case BsiAgg::Sum: acc = bsi_add(acc, inputs[i]); break;
            case BsiAgg::Max: acc = max_pair(acc, inputs[i]); break;
            case BsiAgg::Mul: acc = bsi_multiply(acc, inputs[i]); break;
            case BsiAgg::DistinctPos: break;
        }
    }
    return acc;
}

} // namespace bsim
