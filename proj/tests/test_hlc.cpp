#include <doctest.h>

#include "pwc/hlc.hpp"
#include "pwc/rng.hpp"

using namespace pwc;

TEST_CASE("hlc_send_or_local") {
    CHECK(hlc_send_or_local({10, 2}, 11) == HlcState{11, 0});
    CHECK(hlc_send_or_local({10, 2}, 9) == HlcState{10, 3});
    CHECK(hlc_send_or_local({0, 0}, 0) == HlcState{0, 1});
}

TEST_CASE("hlc_receive four-way case split") {
    CHECK(hlc_receive({10, 1}, {10, 4}, 9) == HlcState{10, 5});
    CHECK(hlc_receive({10, 1}, {12, 0}, 9) == HlcState{12, 1});
    CHECK(hlc_receive({10, 1}, {3, 9}, 20) == HlcState{20, 0});
    // l == l' branch without the message mattering
    CHECK(hlc_receive({10, 3}, {4, 9}, 9) == HlcState{10, 4});
}

TEST_CASE("hlc encode/decode round trip and field layout") {
    // Worked pair: (pt=15, l=15, c=0) and (pt=14, l=19, c=0).
    const HlcEncoded e = hlc_encode(15, {15, 0});
    const HlcEncoded f = hlc_encode(14, {19, 0});
    CHECK(e.value == 15u * 65536u);        // high 48 = 15, diff 0, c 0
    CHECK(f.value == 14u * 65536u + 5u * 16u);
    CHECK(f.value == 917584u);
    CHECK(hlc_decode(e) == HlcState{15, 0});
    CHECK(hlc_decode(f) == HlcState{19, 0});

    CHECK(hlc_encode(0, {0, 0}).value == 0);

    CHECK_THROWS_AS(hlc_encode(0, {4096, 0}), std::range_error);   // diff too wide
    CHECK_THROWS_AS(hlc_encode(5, {5, 16}), std::range_error);     // counter too wide
    CHECK_THROWS_AS(hlc_encode(9, {5, 0}), std::range_error);      // l < pt

    Xoshiro256 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t pt = rng.below(std::uint64_t{1} << 48);
        const std::uint64_t diff = rng.below(4096);
        const std::uint64_t c = rng.below(16);
        const HlcState s{pt + diff, c};
        CHECK(hlc_decode(hlc_encode(pt, s)) == s);
    }
}

TEST_CASE("hlc byte serialization is big-endian") {
    const HlcEncoded f = hlc_encode(14, {19, 0});  // 917584 = 0x000E0050
    const auto bytes = hlc_to_bytes(f);
    CHECK(bytes == std::array<std::uint8_t, 8>{0, 0, 0, 0, 0, 0x0E, 0x00, 0x50});
    CHECK(hlc_from_bytes(bytes) == f);

    Xoshiro256 rng(29);
    for (int i = 0; i < 500; ++i) {
        const HlcEncoded e{rng.next()};
        CHECK(hlc_from_bytes(hlc_to_bytes(e)) == e);
    }
}

TEST_CASE("hlc_compare decodes before ordering; raw integers can disagree") {
    const HlcEncoded e = hlc_encode(15, {15, 0});
    const HlcEncoded f = hlc_encode(14, {19, 0});
    // Correct HLC order says e < f (l 15 < 19)...
    CHECK(hlc_compare(e, f) == std::strong_ordering::less);
    // ...while the raw 64-bit values order the other way.
    CHECK(e.value > f.value);

    CHECK(hlc_compare(e, e) == std::strong_ordering::equal);
    CHECK(hlc_compare(hlc_encode(100, {105, 1}), hlc_encode(100, {105, 2})) ==
          std::strong_ordering::less);
}
