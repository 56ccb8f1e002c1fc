#include "bsim/bitmap.hpp"

#include <algorithm>

#include "bsim/detail/bytes.hpp"

namespace bsim {

namespace {

constexpr uint32_t kMagic = 0x42534D31;
constexpr uint8_t kVersion = 1;

uint32_t popcount_words(std::span<const uint64_t> words) {
    uint32_t c = 0;
    for (uint64_t w : words) c += uint32_t(std::popcount(w));
    return c;
}

} // namespace

// --- Container -------------------------------------------------------------

bool Container::binary_find(uint16_t v) const {
    return std::binary_search(array_.begin(), array_.end(), v);
}

void Container::to_bitset() {
    words_.assign(kWords, 0);
    for (uint16_t v : array_) words_[v >> 6] |= uint64_t(1) << (v & 63);
    array_.clear();
    array_.shrink_to_fit();
}

void Container::add(uint16_t v) {
    if (is_bitset()) {
        uint64_t& w = words_[v >> 6];
        uint64_t mask = uint64_t(1) << (v & 63);
        if (!(w & mask)) {
            w |= mask;
            ++card_;
        }
        return;
    }
    auto it = std::lower_bound(array_.begin(), array_.end(), v);
    if (it != array_.end() && *it == v) return;
    if (card_ == kArrayMax) {
        to_bitset();
        add(v);
        return;
    }
    array_.insert(it, v);
    ++card_;
}

Container Container::from_sorted(std::span<const uint16_t> values) {
    Container c;
    c.card_ = uint32_t(values.size());
    if (c.card_ > kArrayMax) {
        c.words_.assign(kWords, 0);
        for (uint16_t v : values) c.words_[v >> 6] |= uint64_t(1) << (v & 63);
    } else {
        c.array_.assign(values.begin(), values.end());
    }
    return c;
}

Container Container::from_words(std::vector<uint64_t> words, uint32_t card) {
    Container c;
    c.card_ = card;
    if (card > kArrayMax) {
        c.words_ = std::move(words);
    } else {
        c.array_.reserve(card);
        for (uint32_t w = 0; w < kWords; ++w) {
            uint64_t bits = words[w];
            while (bits) {
                c.array_.push_back(uint16_t(w * 64 + std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
    }
    return c;
}

// --- per-container kernels ---------------------------------------------------

namespace {

Container container_and(const Container& a, const Container& b) {
    if (a.is_bitset() && b.is_bitset()) {
        std::vector<uint64_t> out(Container::kWords);
        const auto wa = a.words(), wb = b.words();
        for (uint32_t i = 0; i < Container::kWords; ++i) out[i] = wa[i] & wb[i];
        uint32_t card = popcount_words(out);
        return Container::from_words(std::move(out), card);
    }
    // at least one array: probe the other side
    const Container& arr = a.is_bitset() ? b : a;
    const Container& other = a.is_bitset() ? a : b;
    std::vector<uint16_t> vals;
    for (uint16_t v : arr.array())
        if (other.contains(v)) vals.push_back(v);
    return Container::from_sorted(vals);
}

Container container_or(const Container& a, const Container& b) {
    if (!a.is_bitset() && !b.is_bitset() && a.cardinality() + b.cardinality() <= Container::kArrayMax) {
        std::vector<uint16_t> vals;
        vals.reserve(a.cardinality() + b.cardinality());
        std::set_union(a.array().begin(), a.array().end(), b.array().begin(), b.array().end(),
                       std::back_inserter(vals));
        return Container::from_sorted(vals);
    }
    std::vector<uint64_t> out(Container::kWords, 0);
    auto set_into = [&out](const Container& c) {
        if (c.is_bitset()) {
            const auto w = c.words();
            for (uint32_t i = 0; i < Container::kWords; ++i) out[i] |= w[i];
        } else {
            for (uint16_t v : c.array()) out[v >> 6] |= uint64_t(1) << (v & 63);
        }
    };
    set_into(a);
    set_into(b);
    uint32_t card = popcount_words(out);
    return Container::from_words(std::move(out), card);
}

Container container_xor(const Container& a, const Container& b) {
    if (!a.is_bitset() && !b.is_bitset()) {
        std::vector<uint16_t> vals;
        vals.reserve(a.cardinality() + b.cardinality());
        std::set_symmetric_difference(a.array().begin(), a.array().end(), b.array().begin(),
                                      b.array().end(), std::back_inserter(vals));
        if (vals.size() <= Container::kArrayMax) return Container::from_sorted(vals);
        std::vector<uint64_t> out(Container::kWords, 0);
        for (uint16_t v : vals) out[v >> 6] |= uint64_t(1) << (v & 63);
        return Container::from_words(std::move(out), uint32_t(vals.size()));
    }
    std::vector<uint64_t> out(Container::kWords, 0);
    const Container* bs = &a;
    const Container* rest = &b;
    if (!a.is_bitset()) std::swap(bs, rest);
    std::copy(bs->words().begin(), bs->words().end(), out.begin());
    if (rest->is_bitset()) {
        const auto w = rest->words();
        for (uint32_t i = 0; i < Container::kWords; ++i) out[i] ^= w[i];
    } else {
        for (uint16_t v : rest->array()) out[v >> 6] ^= uint64_t(1) << (v & 63);
    }
    uint32_t card = popcount_words(out);
    return Container::from_words(std::move(out), card);
}

Container container_andnot(const Container& a, const Container& b) {
    if (!a.is_bitset()) {
        std::vector<uint16_t> vals;
        for (uint16_t v : a.array())
            if (!b.contains(v)) vals.push_back(v);
        return Container::from_sorted(vals);
    }
    std::vector<uint64_t> out(a.words().begin(), a.words().end());
    if (b.is_bitset()) {
        const auto w = b.words();
        for (uint32_t i = 0; i < Container::kWords; ++i) out[i] &= ~w[i];
    } else {
        for (uint16_t v : b.array()) out[v >> 6] &= ~(uint64_t(1) << (v & 63));
    }
    uint32_t card = popcount_words(out);
    return Container::from_words(std::move(out), card);
}

} // namespace

// --- Bitmap ------------------------------------------------------------------

Bitmap::Bitmap(std::initializer_list<uint32_t> positions) {
    for (uint32_t p : positions) add(p);
}

Bitmap Bitmap::from_sorted(std::span<const uint32_t> positions) {
    BitmapBuilder b;
    for (uint32_t p : positions) b.append(p);
    return b.finish();
}

Bitmap Bitmap::from_values(std::span<const uint32_t> positions) {
    Bitmap bm;
    for (uint32_t p : positions) bm.add(p);
    return bm;
}

const Container* Bitmap::find(uint16_t key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, uint16_t k) { return e.key < k; });
    if (it == entries_.end() || it->key != key) return nullptr;
    return &it->container;
}

Container* Bitmap::find_or_insert(uint16_t key) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, uint16_t k) { return e.key < k; });
    if (it == entries_.end() || it->key != key) it = entries_.insert(it, Entry{key, Container{}});
    return &it->container;
}

void Bitmap::add(uint32_t p) {
    find_or_insert(uint16_t(p >> 16))->add(uint16_t(p & 0xFFFF));
}

bool Bitmap::contains(uint32_t p) const {
    const Container* c = find(uint16_t(p >> 16));
    return c && c->contains(uint16_t(p & 0xFFFF));
}

uint64_t Bitmap::cardinality() const {
    uint64_t n = 0;
    for (const Entry& e : entries_) n += e.container.cardinality();
    return n;
}

std::vector<uint32_t> Bitmap::to_vector() const {
    std::vector<uint32_t> out;
    out.reserve(cardinality());
    for_each([&](uint32_t p) { out.push_back(p); });
    return out;
}

Bitmap operator&(const Bitmap& a, const Bitmap& b) {
    Bitmap out;
    size_t i = 0, j = 0;
    while (i < a.entries_.size() && j < b.entries_.size()) {
        uint16_t ka = a.entries_[i].key, kb = b.entries_[j].key;
        if (ka < kb) {
            ++i;
        } else if (kb < ka) {
            ++j;
        } else {
            Container c = container_and(a.entries_[i].container, b.entries_[j].container);
            if (!c.empty()) out.entries_.push_back({ka, std::move(c)});
            ++i;
            ++j;
        }
    }
    return out;
}

Bitmap operator|(const Bitmap& a, const Bitmap& b) {
    Bitmap out;
    size_t i = 0, j = 0;
    while (i < a.entries_.size() || j < b.entries_.size()) {
        if (j == b.entries_.size() || (i < a.entries_.size() && a.entries_[i].key < b.entries_[j].key)) {
            out.entries_.push_back(a.entries_[i++]);
        } else if (i == a.entries_.size() || b.entries_[j].key < a.entries_[i].key) {
            out.entries_.push_back(b.entries_[j++]);
        } else {
            out.entries_.push_back(
                {a.entries_[i].key, container_or(a.entries_[i].container, b.entries_[j].container)});
            ++i;
            ++j;
        }
    }
    return out;
}

Bitmap operator^(const Bitmap& a, const Bitmap& b) {
    Bitmap out;
    size_t i = 0, j = 0;
    while (i < a.entries_.size() || j < b.entries_.size()) {
        if (j == b.entries_.size() || (i < a.entries_.size() && a.entries_[i].key < b.entries_[j].key)) {
            out.entries_.push_back(a.entries_[i++]);
        } else if (i == a.entries_.size() || b.entries_[j].key < a.entries_[i].key) {
            out.entries_.push_back(b.entries_[j++]);
        } else {
            Container c = container_xor(a.entries_[i].container, b.entries_[j].container);
            if (!c.empty()) out.entries_.push_back({a.entries_[i].key, std::move(c)});
            ++i;
            ++j;
        }
    }
    return out;
}

Bitmap andnot(const Bitmap& a, const Bitmap& b) {
    Bitmap out;
    size_t j = 0;
    for (const auto& e : a.entries_) {
        while (j < b.entries_.size() && b.entries_[j].key < e.key) ++j;
        if (j < b.entries_.size() && b.entries_[j].key == e.key) {
            Container c = container_andnot(e.container, b.entries_[j].container);
            if (!c.empty()) out.entries_.push_back({e.key, std::move(c)});
        } else {
            out.entries_.push_back(e);
        }
    }
    return out;
}

size_t Bitmap::byte_size_estimate() const {
    size_t n = 7; // header
    for (const Entry& e : entries_) {
        n += 5;
        n += e.container.is_bitset() ? 8192 : size_t(e.container.cardinality()) * 2;
    }
    return n;
}

void Bitmap::serialize(std::vector<uint8_t>& out) const {
    detail::ByteWriter w(out);
    if (entries_.size() > 0xFFFF)
        throw Error(Errc::Overflow, "bitmap has too many containers to serialize");
    w.u32(kMagic);
    w.u8(kVersion);
    w.u16(uint16_t(entries_.size()));
    for (const Entry& e : entries_) {
        w.u16(e.key);
        w.u8(e.container.is_bitset() ? 1 : 0);
        w.u16(uint16_t(e.container.cardinality() - 1));
        if (e.container.is_bitset()) {
            for (uint64_t word : e.container.words()) w.u64(word);
        } else {
            for (uint16_t v : e.container.array()) w.u16(v);
        }
    }
}

std::vector<uint8_t> Bitmap::serialize() const {
    std::vector<uint8_t> out;
    serialize(out);
    return out;
}

Bitmap Bitmap::deserialize(std::span<const uint8_t> in) {
    detail::ByteReader r(in);
    if (r.u32() != kMagic) throw Error(Errc::BadMagic, "not a bitmap payload");
    if (r.u8() != kVersion) throw Error(Errc::BadVersion, "unsupported bitmap version");
    uint16_t count = r.u16();
    Bitmap bm;
    bm.entries_.reserve(count);
    int32_t last_key = -1;
    for (uint16_t n = 0; n < count; ++n) {
        uint16_t key = r.u16();
        if (int32_t(key) <= last_key) throw Error(Errc::UnsortedKeys, "container keys not increasing");
        last_key = key;
        uint8_t kind = r.u8();
        uint32_t card = uint32_t(r.u16()) + 1;
        Container c;
        if (kind == 0) {
            if (card > Container::kArrayMax)
                throw Error(Errc::Malformed, "array container over 4096 values");
            std::vector<uint16_t> vals(card);
            int32_t prev = -1;
            for (uint32_t i = 0; i < card; ++i) {
                vals[i] = r.u16();
                if (int32_t(vals[i]) <= prev)
                    throw Error(Errc::Malformed, "array values not increasing");
                prev = vals[i];
            }
            c = Container::from_sorted(vals);
        } else if (kind == 1) {
            if (card <= Container::kArrayMax)
                throw Error(Errc::Malformed, "bitset container under 4097 values");
            std::vector<uint64_t> words(Container::kWords);
            for (uint32_t i = 0; i < Container::kWords; ++i) words[i] = r.u64();
            if (popcount_words(words) != card)
                throw Error(Errc::Malformed, "bitset cardinality mismatch");
            c = Container::from_words(std::move(words), card);
        } else {
            throw Error(Errc::Malformed, "unknown container kind");
        }
        bm.entries_.push_back({key, std::move(c)});
    }
    if (!r.done()) throw Error(Errc::Malformed, "trailing bytes after bitmap");
    return bm;
}

// --- BitmapBuilder -------------------------------------------------------------

void BitmapBuilder::flush() {
    if (pending_key_ < 0) return;
    if (!pending_.empty()) {
        if (!bm_.entries_.empty() && bm_.entries_.back().key >= pending_key_)
            throw Error(Errc::UnsortedInput, "builder keys not increasing");
        bm_.entries_.push_back({uint16_t(pending_key_), Container::from_sorted(pending_)});
    }
    pending_.clear();
    pending_key_ = -1;
}

void BitmapBuilder::append_block(uint16_t key, std::span<const uint16_t> lows) {
    if (lows.empty()) return;
    if (pending_key_ >= 0 && key != pending_key_) flush();
    if (!bm_.entries_.empty() && key < bm_.entries_.back().key)
        throw Error(Errc::UnsortedInput, "builder keys not increasing");
    if (pending_key_ < 0) pending_key_ = key;
    int64_t base = int64_t(key) << 16;
    int32_t prev = pending_.empty() ? -1 : int32_t(pending_.back());
    for (uint16_t v : lows) {
        if (int32_t(v) <= prev) throw Error(Errc::UnsortedInput, "builder positions not increasing");
        prev = v;
        pending_.push_back(v);
    }
    last_position_ = base | pending_.back();
}

void BitmapBuilder::append(uint32_t position) {
    if (int64_t(position) <= last_position_)
        throw Error(Errc::UnsortedInput, "builder positions not increasing");
    uint16_t key = uint16_t(position >> 16);
    if (pending_key_ >= 0 && key != pending_key_) flush();
    pending_key_ = key;
    pending_.push_back(uint16_t(position & 0xFFFF));
    last_position_ = position;
}

Bitmap BitmapBuilder::finish() {
    flush();
    Bitmap out = std::move(bm_);
    bm_ = Bitmap();
    last_position_ = -1;
    return out;
}

} // namespace bsim
