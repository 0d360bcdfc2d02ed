#include "pwc/wire.hpp"

#include <stdexcept>

namespace pwc {

namespace {

void put_be(std::uint8_t* out, std::uint64_t v, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) {
        out[i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
}

std::uint64_t get_be(const std::uint8_t* in, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v = (v << 8) | in[i];
    }
    return v;
}

}  // namespace

std::vector<std::uint8_t> wire_encode(const WireMessage& m, std::size_t payload_size) {
    if (payload_size < kWireHeaderSize) {
        throw std::invalid_argument("payload smaller than the wire header");
    }
    std::vector<std::uint8_t> out(payload_size, 0);
    out[0] = kWireMagic0;
    out[1] = kWireMagic1;
    out[2] = kWireVersion;
    put_be(out.data() + 3, m.sender_id, 2);
    put_be(out.data() + 5, m.seq, 8);
    put_be(out.data() + 13, m.pwc, 8);
    out[21] = m.u;
    return out;
}

WireDecodeResult wire_decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kWireHeaderSize || bytes[0] != kWireMagic0 ||
        bytes[1] != kWireMagic1 || bytes[2] != kWireVersion) {
        return {};
    }
    WireMessage m;
    m.sender_id = static_cast<std::uint16_t>(get_be(bytes.data() + 3, 2));
    m.seq = get_be(bytes.data() + 5, 8);
    m.pwc = get_be(bytes.data() + 13, 8);
    m.u = bytes[21];
    return {true, m};
}

}  // namespace pwc
