#include <doctest.h>

#include <algorithm>
#include <set>

#include "bsim/bitmap.hpp"
#include "support/testutil.hpp"

using namespace bsim;
using testutil::Rng;

namespace {

std::set<uint32_t> to_set(const Bitmap& bm) {
    std::set<uint32_t> s;
    bm.for_each([&](uint32_t p) { s.insert(p); });
    return s;
}

void check_normalized(const Bitmap& bm) {
    int64_t last_key = -1;
    for (const auto& e : bm.entries()) {
        CHECK(int64_t(e.key) > last_key);
        last_key = e.key;
        CHECK(e.container.cardinality() > 0);
        if (e.container.is_bitset()) {
            CHECK(e.container.cardinality() > Container::kArrayMax);
        } else {
            CHECK(e.container.cardinality() <= Container::kArrayMax);
            CHECK(e.container.cardinality() == e.container.array().size());
            CHECK(std::is_sorted(e.container.array().begin(), e.container.array().end()));
        }
    }
}

} // namespace

TEST_CASE("basic membership and cardinality") {
    Bitmap bm;
    CHECK(bm.cardinality() == 0);
    CHECK(bm.empty());
    bm.add(42);
    bm.add(42);
    CHECK(bm.contains(42));
    CHECK(!bm.contains(41));
    CHECK(bm.cardinality() == 1);

    Bitmap ab{1, 2, 3};
    Bitmap cd{2, 3, 4};
    CHECK(to_set(ab & cd) == std::set<uint32_t>{2, 3});
    CHECK(to_set(ab | cd) == std::set<uint32_t>{1, 2, 3, 4});
    CHECK(to_set(ab ^ cd) == std::set<uint32_t>{1, 4});
    CHECK(to_set(andnot(ab, cd)) == std::set<uint32_t>{1});
    CHECK((ab ^ ab).empty());
}

TEST_CASE("iteration is ascending") {
    Bitmap bm{7, 3};
    CHECK(bm.to_vector() == std::vector<uint32_t>{3, 7});
    CHECK(Bitmap{}.to_vector().empty());

    Rng rng(7001);
    auto positions = testutil::random_positions(rng, 100000, 0xFFFFFFFF);
    Bitmap big = Bitmap::from_values(positions);
    CHECK(big.to_vector() == positions); // already sorted by construction of the oracle
}

TEST_CASE("array container promotes to bitset past 4096") {
    Bitmap bm;
    for (uint32_t i = 0; i < 5000; ++i) bm.add(i * 2); // one key, 5000 values
    CHECK(bm.cardinality() == 5000);
    REQUIRE(bm.entries().size() == 1);
    CHECK(bm.entries()[0].container.is_bitset());

    Bitmap at_limit;
    for (uint32_t i = 0; i < 4096; ++i) at_limit.add(i);
    REQUIRE(at_limit.entries().size() == 1);
    CHECK(!at_limit.entries()[0].container.is_bitset());
}

TEST_CASE("from_sorted equals incremental construction") {
    Rng rng(7002);
    auto positions = testutil::random_positions(rng, 20000, 1 << 20);
    CHECK(Bitmap::from_sorted(positions) == Bitmap::from_values(positions));
    CHECK_THROWS_AS(Bitmap::from_sorted(std::vector<uint32_t>{5, 5}), Error);
    CHECK_THROWS_AS(Bitmap::from_sorted(std::vector<uint32_t>{5, 4}), Error);
}

TEST_CASE("set algebra matches a hash-set oracle") {
    Rng rng(7003);
    for (int iter = 0; iter < 10000; ++iter) {
        size_t na = 1 + rng() % 60;
        size_t nb = 1 + rng() % 60;
        // mostly overlapping key space so containers collide
        uint32_t span = (iter % 3 == 0) ? 0xFFFFFFFF : (1 << 18);
        auto va = testutil::random_positions(rng, na, span);
        auto vb = testutil::random_positions(rng, nb, span);
        std::set<uint32_t> sa(va.begin(), va.end()), sb(vb.begin(), vb.end());
        Bitmap a = Bitmap::from_values(va), b = Bitmap::from_values(vb);

        std::set<uint32_t> expect_and, expect_or, expect_xor, expect_andnot;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::inserter(expect_and, expect_and.end()));
        std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(),
                       std::inserter(expect_or, expect_or.end()));
        std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                                      std::inserter(expect_xor, expect_xor.end()));
        std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                            std::inserter(expect_andnot, expect_andnot.end()));

        REQUIRE(to_set(a & b) == expect_and);
        REQUIRE(to_set(a | b) == expect_or);
        REQUIRE(to_set(a ^ b) == expect_xor);
        REQUIRE(to_set(andnot(a, b)) == expect_andnot);
    }
}

TEST_CASE("set algebra across container kinds stays normalized") {
    Rng rng(7004);
    // dense sets that cross the 4096 boundary in both directions
    for (int iter = 0; iter < 40; ++iter) {
        size_t na = 3000 + rng() % 4000;
        size_t nb = 3000 + rng() % 4000;
        auto va = testutil::random_positions(rng, na, 2 << 16);
        auto vb = testutil::random_positions(rng, nb, 2 << 16);
        std::set<uint32_t> sa(va.begin(), va.end()), sb(vb.begin(), vb.end());
        Bitmap a = Bitmap::from_values(va), b = Bitmap::from_values(vb);

        for (const Bitmap& r : {a & b, a | b, a ^ b, andnot(a, b)}) {
            check_normalized(r);
        }
        std::set<uint32_t> expect_or;
        std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(),
                       std::inserter(expect_or, expect_or.end()));
        REQUIRE(to_set(a | b) == expect_or);
    }
}

TEST_CASE("or with 1e5 random positions matches sorted-merge oracle") {
    Rng rng(7005);
    auto va = testutil::random_positions(rng, 50000, 0xFFFFFFFF);
    auto vb = testutil::random_positions(rng, 50000, 0xFFFFFFFF);
    std::vector<uint32_t> merged;
    std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(merged));
    Bitmap r = Bitmap::from_values(va) | Bitmap::from_values(vb);
    CHECK(r.to_vector() == merged);
}

TEST_CASE("serialization round trip") {
    SUBCASE("empty bitmap has entry count 0") {
        auto bytes = Bitmap{}.serialize();
        REQUIRE(bytes.size() == 7);
        CHECK(bytes[5] == 0);
        CHECK(bytes[6] == 0);
        CHECK(Bitmap::deserialize(bytes) == Bitmap{});
    }
    SUBCASE("multi-key round trip") {
        Bitmap bm{0, 65536, 1u << 31};
        Bitmap back = Bitmap::deserialize(bm.serialize());
        CHECK(back == bm);
        CHECK(to_set(back) == std::set<uint32_t>{0, 65536, 1u << 31});
    }
    SUBCASE("random round trips, both container kinds") {
        Rng rng(7006);
        for (int iter = 0; iter < 50; ++iter) {
            auto vals = testutil::random_positions(rng, 1 + rng() % 9000, 3 << 16);
            Bitmap bm = Bitmap::from_values(vals);
            auto bytes = bm.serialize();
            Bitmap back = Bitmap::deserialize(bytes);
            REQUIRE(back == bm);
            REQUIRE(back.serialize() == bytes); // canonical bytes are stable
        }
    }
}

TEST_CASE("deserialize rejects malformed input") {
    Bitmap bm{1, 2, 70000};
    auto good = bm.serialize();

    auto bad_magic = good;
    bad_magic[0] ^= 0xFF;
    CHECK(testutil::code_of([&] { Bitmap::deserialize(bad_magic); }) == Errc::BadMagic);

    auto bad_version = good;
    bad_version[4] = 9;
    CHECK(testutil::code_of([&] { Bitmap::deserialize(bad_version); }) == Errc::BadVersion);

    auto truncated = good;
    truncated.resize(truncated.size() - 1);
    CHECK(testutil::code_of([&] { Bitmap::deserialize(truncated); }) == Errc::Truncated);

    // swap the two entries' keys to break ordering
    Bitmap two{1, 100000};
    auto bytes = two.serialize();
    // entries start at offset 7; a single-value array entry is 7 bytes
    std::swap(bytes[7], bytes[14]);
    std::swap(bytes[8], bytes[15]);
    CHECK(testutil::code_of([&] { Bitmap::deserialize(bytes); }) == Errc::UnsortedKeys);

    auto trailing = good;
    trailing.push_back(0);
    CHECK(testutil::code_of([&] { Bitmap::deserialize(trailing); }) == Errc::Malformed);
}
