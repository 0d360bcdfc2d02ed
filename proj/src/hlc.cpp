#include "pwc/hlc.hpp"

#include <algorithm>
#include <stdexcept>

namespace pwc {

namespace {
constexpr std::uint64_t kDiffLimit = std::uint64_t{1} << kHlcDiffBits;
constexpr std::uint64_t kCounterLimit = std::uint64_t{1} << kHlcCounterBits;
constexpr std::uint64_t kPhysLimit = std::uint64_t{1} << 48;
}  // namespace

HlcState hlc_send_or_local(HlcState state, Ticks pt) {
    const std::uint64_t prev_l = state.l;
    state.l = std::max(prev_l, pt);
    state.c = (state.l == prev_l) ? state.c + 1 : 0;
    return state;
}

HlcState hlc_receive(HlcState state, HlcState msg, Ticks pt) {
    const std::uint64_t prev_l = state.l;
    state.l = std::max({prev_l, msg.l, pt});
    if (state.l == prev_l && state.l == msg.l) {
        state.c = std::max(state.c, msg.c) + 1;
    } else if (state.l == prev_l) {
        state.c = state.c + 1;
    } else if (state.l == msg.l) {
        state.c = msg.c + 1;
    } else {
        state.c = 0;
    }
    return state;
}

HlcEncoded hlc_encode(Ticks pt, HlcState state) {
    if (state.l < pt) {
        throw std::range_error("HLC encode: l < pt");
    }
    const std::uint64_t diff = state.l - pt;
    if (diff >= kDiffLimit) {
        throw std::range_error("HLC encode: l - pt does not fit in 12 bits");
    }
    if (state.c >= kCounterLimit) {
        throw std::range_error("HLC encode: c does not fit in 4 bits");
    }
    if (pt >= kPhysLimit) {
        throw std::range_error("HLC encode: pt does not fit in 48 bits");
    }
    return HlcEncoded{(pt << (kHlcDiffBits + kHlcCounterBits)) |
                      (diff << kHlcCounterBits) | state.c};
}

HlcState hlc_decode(HlcEncoded enc) {
    const std::uint64_t pt48 = enc.value >> (kHlcDiffBits + kHlcCounterBits);
    const std::uint64_t diff = (enc.value >> kHlcCounterBits) & (kDiffLimit - 1);
    const std::uint64_t c = enc.value & (kCounterLimit - 1);
    return HlcState{pt48 + diff, c};
}

std::strong_ordering hlc_compare(HlcEncoded a, HlcEncoded b) {
    return hlc_decode(a) <=> hlc_decode(b);
}

std::array<std::uint8_t, 8> hlc_to_bytes(HlcEncoded enc) {
    std::array<std::uint8_t, 8> out{};
    std::uint64_t v = enc.value;
    for (int i = 7; i >= 0; --i) {
        out[i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

HlcEncoded hlc_from_bytes(const std::array<std::uint8_t, 8>& bytes) {
    std::uint64_t v = 0;
    for (std::uint8_t b : bytes) {
        v = (v << 8) | b;
    }
    return HlcEncoded{v};
}

}  // namespace pwc
