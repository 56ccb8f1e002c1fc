#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bsim/bitmap.hpp"

namespace bsim {

class BinaryBsi;

// Bit-sliced index: slice i holds bit i of every value, low slice first.
// A value of zero means the position is absent; trailing empty slices are
// always trimmed.
class Bsi {
public:
    static constexpr int kMaxSlices = 64;

    Bsi() = default;

    static Bsi from_pairs(std::span<const std::pair<uint32_t, uint64_t>> pairs);
    // Takes slices low-first; trims trailing empties, rejects width > 64.
    static Bsi from_slices(std::vector<Bitmap> slices);

    uint64_t get(uint32_t pos) const;
    Bitmap nonzero() const;
    int slice_count() const { return int(slices_.size()); }
    const Bitmap& slice(int i) const { return slices_[size_t(i)]; }
    std::span<const Bitmap> slices() const { return slices_; }
    bool empty() const { return slices_.empty(); }

    uint64_t sum() const;   // sum of all stored values
    uint64_t count() const; // number of nonzero positions
    uint64_t min_value() const;
    uint64_t max_value() const;

    size_t byte_size_estimate() const;

    void serialize(std::vector<uint8_t>& out) const;
    std::vector<uint8_t> serialize() const;
    static Bsi deserialize(std::span<const uint8_t> in);

    bool operator==(const Bsi& other) const { return slices_ == other.slices_; }

private:
    std::vector<Bitmap> slices_;
};

// A BSI with at most one slice; values are 0 or 1. Produced by comparisons
// and distinctPos, consumed by the masking multiply.
class BinaryBsi {
public:
    BinaryBsi() = default;
    explicit BinaryBsi(Bitmap bits) : bits_(std::move(bits)) {}
    static BinaryBsi from_bsi(const Bsi& x); // NotBinary error when wider than one slice

    const Bitmap& bits() const { return bits_; }
    Bsi to_bsi() const;
    bool empty() const { return bits_.empty(); }

    bool operator==(const BinaryBsi& other) const { return bits_ == other.bits_; }

private:
    Bitmap bits_;
};

enum class CmpOp { Lt, Gt, Le, Ge, Eq, Ne };

// Strict follows the comparison algorithms' contract: both operands must be
// nonzero for a row to match. Total treats absence as the value 0, restricted
// to rows present in at least one operand.
enum class CmpMode { Strict, Total };

Bsi bsi_add(const Bsi& x, const Bsi& y);
Bsi bsi_subtract(const Bsi& x, const Bsi& y); // Underflow error lists violating-row count
Bsi bsi_multiply_binary(const Bsi& x, const BinaryBsi& mask);
Bsi bsi_multiply(const Bsi& x, const Bsi& y);
BinaryBsi bsi_compare(const Bsi& x, const Bsi& y, CmpOp op, CmpMode mode);
BinaryBsi bsi_compare_scalar(const Bsi& x, CmpOp op, uint64_t k);
Bsi bsi_add_scalar(const Bsi& x, uint64_t k); // adds only where x is present

enum class BsiAgg { Sum, Max, Mul, DistinctPos };

// Left fold of the pairwise aggregate over one or more inputs.
Bsi bsi_agg(BsiAgg kind, std::span<const Bsi> inputs);
BinaryBsi bsi_distinct_pos(std::span<const Bsi> inputs);

} // namespace bsim
