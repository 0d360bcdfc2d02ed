#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "pwc/clock.hpp"

namespace pwc {

// Hybrid logical clock (l, c) pair. Kept as the comparison baseline: unlike a
// PWC value, an HLC timestamp has to be unpacked before it can be ordered.
struct HlcState {
    std::uint64_t l = 0;
    std::uint64_t c = 0;
    friend constexpr auto operator<=>(const HlcState&, const HlcState&) = default;
};

// 48-bit physical part, 12-bit l-pt diff, 4-bit counter.
struct HlcEncoded {
    std::uint64_t value = 0;
    friend constexpr auto operator<=>(const HlcEncoded&, const HlcEncoded&) = default;
};

inline constexpr unsigned kHlcDiffBits = 12;
inline constexpr unsigned kHlcCounterBits = 4;

HlcState hlc_send_or_local(HlcState state, Ticks pt);
HlcState hlc_receive(HlcState state, HlcState msg, Ticks pt);

// Throws std::range_error when l - pt or c does not fit its field; that
// failure mode is intrinsic to the encoding and callers are expected to
// count it under large-skew workloads.
HlcEncoded hlc_encode(Ticks pt, HlcState state);
HlcState hlc_decode(HlcEncoded enc);

// The correct HLC order: decode both and compare (l, c) lexicographically.
std::strong_ordering hlc_compare(HlcEncoded a, HlcEncoded b);

// Big-endian wire form.
std::array<std::uint8_t, 8> hlc_to_bytes(HlcEncoded enc);
HlcEncoded hlc_from_bytes(const std::array<std::uint8_t, 8>& bytes);

}  // namespace pwc
