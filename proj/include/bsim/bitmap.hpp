#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "bsim/error.hpp"

namespace bsim {

// One 16-bit-keyed block of a Bitmap. Holds the low halves of positions as
// either a sorted array (cardinality <= 4096) or a 65536-bit bitset.
class Container {
public:
    static constexpr uint32_t kArrayMax = 4096;
    static constexpr uint32_t kSlots = 65536;
    static constexpr uint32_t kWords = kSlots / 64;

    Container() = default;

    bool is_bitset() const { return !words_.empty(); }
    uint32_t cardinality() const { return card_; }
    bool empty() const { return card_ == 0; }

    bool contains(uint16_t v) const {
        if (is_bitset()) return (words_[v >> 6] >> (v & 63)) & 1;
        return binary_find(v);
    }

    // Insert keeping the kind matched to the cardinality bound.
    void add(uint16_t v);

    std::span<const uint16_t> array() const { return array_; }
    std::span<const uint64_t> words() const { return words_; }

    template <class F>
    void for_each(F&& f) const {
        if (is_bitset()) {
            for (uint32_t w = 0; w < kWords; ++w) {
                uint64_t bits = words_[w];
                while (bits) {
                    f(uint16_t(w * 64 + std::countr_zero(bits)));
                    bits &= bits - 1;
                }
            }
        } else {
            for (uint16_t v : array_) f(v);
        }
    }

    // values strictly increasing; picks the kind from the count.
    static Container from_sorted(std::span<const uint16_t> values);
    // takes ownership of a 1024-word bitset; demotes to array when card <= 4096.
    static Container from_words(std::vector<uint64_t> words, uint32_t card);

    bool operator==(const Container& other) const {
        return card_ == other.card_ && array_ == other.array_ && words_ == other.words_;
    }

private:
    friend class Bitmap;

    bool binary_find(uint16_t v) const;
    void to_bitset();

    std::vector<uint16_t> array_; // sorted, unique; active when words_ empty
    std::vector<uint64_t> words_; // kWords words; active when non-empty
    uint32_t card_ = 0;
};

// Compressed set of 32-bit positions: ordered (high-16-bit key, Container)
// entries. Treated as immutable once built; set algebra returns new bitmaps
// with normalized containers.
class Bitmap {
public:
    struct Entry {
        uint16_t key;
        Container container;
        bool operator==(const Entry&) const = default;
    };

    Bitmap() = default;
    Bitmap(std::initializer_list<uint32_t> positions);

    static Bitmap from_sorted(std::span<const uint32_t> positions); // strictly increasing
    static Bitmap from_values(std::span<const uint32_t> positions); // any order, duplicates ok

    void add(uint32_t p);
    bool contains(uint32_t p) const;
    uint64_t cardinality() const;
    bool empty() const { return entries_.empty(); }

    std::span<const Entry> entries() const { return entries_; }
    // Container-level access for the per-bitmap decode kernels.
    const Container* container_for(uint16_t key) const { return find(key); }

    template <class F>
    void for_each(F&& f) const {
        for (const Entry& e : entries_) {
            uint32_t base = uint32_t(e.key) << 16;
            e.container.for_each([&](uint16_t low) { f(base | low); });
        }
    }
    std::vector<uint32_t> to_vector() const;

    friend Bitmap operator&(const Bitmap& a, const Bitmap& b);
    friend Bitmap operator|(const Bitmap& a, const Bitmap& b);
    friend Bitmap operator^(const Bitmap& a, const Bitmap& b);
    friend Bitmap andnot(const Bitmap& a, const Bitmap& b);
    bool operator==(const Bitmap& other) const { return entries_ == other.entries_; }

    size_t byte_size_estimate() const;

    void serialize(std::vector<uint8_t>& out) const;
    std::vector<uint8_t> serialize() const;
    static Bitmap deserialize(std::span<const uint8_t> in);

private:
    friend class BitmapBuilder;

    const Container* find(uint16_t key) const;
    Container* find_or_insert(uint16_t key);

    std::vector<Entry> entries_; // keys strictly increasing, no empty containers
};

Bitmap andnot(const Bitmap& a, const Bitmap& b);

// Appends ascending-key blocks; normalizes once at the end. Used by the
// bulk/pre-sorted encode paths.
class BitmapBuilder {
public:
    // key must be >= any key appended so far; lows strictly increasing within a call.
    void append_block(uint16_t key, std::span<const uint16_t> lows);
    void append(uint32_t position); // positions must arrive strictly increasing
    Bitmap finish();

private:
    Bitmap bm_;
    std::vector<uint16_t> pending_;
    int32_t pending_key_ = -1;
    int64_t last_position_ = -1;
    void flush();
};

} // namespace bsim
