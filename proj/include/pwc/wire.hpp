#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pwc {

// Datagram layout, fixed 22-byte header, all multi-byte fields big-endian:
//   0..1   magic 0x50 0x57 ("PW")
//   2      version 0x01
//   3..4   sender_id
//   5..12  seq
//   13..20 pwc
//   21     u
// followed by zero padding up to payload_size.
struct WireMessage {
    std::uint16_t sender_id = 0;
    std::uint64_t seq = 0;
    std::uint64_t pwc = 0;
    std::uint8_t u = 0;

    friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

inline constexpr std::size_t kWireHeaderSize = 22;
inline constexpr std::uint8_t kWireMagic0 = 0x50;
inline constexpr std::uint8_t kWireMagic1 = 0x57;
inline constexpr std::uint8_t kWireVersion = 0x01;

// payload_size >= header size; the remainder is zero padding.
std::vector<std::uint8_t> wire_encode(const WireMessage& m, std::size_t payload_size);

struct WireDecodeResult {
    bool ok = false;
    WireMessage message{};
};

WireDecodeResult wire_decode(std::span<const std::uint8_t> bytes);

}  // namespace pwc
