#include "neucodex/protocol.hpp"

#include <bit>
#include <cmath>

namespace neucodex {

namespace {

void put_u16(std::vector<uint8_t> &out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u32(std::vector<uint8_t> &out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint16_t get_u16(std::span<const uint8_t> b, size_t at) {
    return static_cast<uint16_t>(b[at] << 8 | b[at + 1]);
}

uint32_t get_u32(std::span<const uint8_t> b, size_t at) {
    return static_cast<uint32_t>(b[at]) << 24 | static_cast<uint32_t>(b[at + 1]) << 16 |
           static_cast<uint32_t>(b[at + 2]) << 8 | static_cast<uint32_t>(b[at + 3]);
}

} // namespace

std::vector<uint8_t> encode_message(const MessageHeader &header,
                                    std::span<const uint8_t> payload) {
    if (static_cast<uint8_t>(header.type) > 4)
        throw ProtocolError("encode_message: unknown message type");
    if (header.timestep == 0)
        throw ProtocolError("encode_message: timestep is 1-based");
    if (payload.size() > 0xFFFFFFFFull)
        throw ProtocolError("encode_message: payload too large");

    std::vector<uint8_t> out;
    out.reserve(kHeaderSize + payload.size());
    out.push_back(kProtocolMagic0);
    out.push_back(kProtocolMagic1);
    out.push_back(kProtocolVersion);
    out.push_back(static_cast<uint8_t>(header.type));
    put_u32(out, header.session_id);
    out.push_back(header.timestep);
    out.push_back(header.flags);
    put_u32(out, static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Message decode_message(std::span<const uint8_t> bytes) {
    if (bytes.size() < kHeaderSize)
        throw FramingError("decode_message: truncated header (" +
                           std::to_string(bytes.size()) + " bytes)");
    if (bytes[0] != kProtocolMagic0 || bytes[1] != kProtocolMagic1)
        throw ProtocolError("decode_message: bad magic");
    if (bytes[2] != kProtocolVersion)
        throw ProtocolError("decode_message: unknown version " +
                            std::to_string(bytes[2]));
    if (bytes[3] > 4)
        throw ProtocolError("decode_message: unknown message type " +
                            std::to_string(bytes[3]));

    Message m;
    m.header.type = static_cast<MsgType>(bytes[3]);
    m.header.session_id = get_u32(bytes, 4);
    m.header.timestep = bytes[8];
    m.header.flags = bytes[9];
    m.header.payload_len = get_u32(bytes, 10);
    if (m.header.timestep == 0)
        throw ProtocolError("decode_message: zero timestep");
    if (bytes.size() < kHeaderSize + m.header.payload_len)
        throw FramingError("decode_message: truncated payload (" +
                           std::to_string(bytes.size() - kHeaderSize) + " of " +
                           std::to_string(m.header.payload_len) + " bytes)");
    if (bytes.size() > kHeaderSize + m.header.payload_len)
        throw ProtocolError("decode_message: trailing bytes after payload");
    m.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
    return m;
}

std::vector<uint8_t> encode_feature_payload(const SpikeTensor &t) {
    const Shape &s = t.shape();
    if (s.rank() != 3)
        throw ProtocolError("feature payload: tensor must be (C,H,W)");
    for (size_t i = 0; i < 3; ++i)
        if (s[i] > 0xFFFF)
            throw ProtocolError("feature payload: extent exceeds 65535");
    std::vector<uint8_t> out;
    out.reserve(8 + t.packed().size());
    put_u16(out, static_cast<uint16_t>(s[0]));
    put_u16(out, static_cast<uint16_t>(s[1]));
    put_u16(out, static_cast<uint16_t>(s[2]));
    put_u16(out, 0); // reserved
    out.insert(out.end(), t.packed().begin(), t.packed().end());
    return out;
}

SpikeTensor decode_feature_payload(std::span<const uint8_t> payload) {
    if (payload.size() < 8)
        throw FramingError("feature payload: truncated shape header");
    const uint16_t c = get_u16(payload, 0);
    const uint16_t h = get_u16(payload, 2);
    const uint16_t w = get_u16(payload, 4);
    if (get_u16(payload, 6) != 0)
        throw ProtocolError("feature payload: reserved extent must be zero");
    if (c == 0 || h == 0 || w == 0)
        throw ProtocolError("feature payload: zero extent");
    const Shape shape({c, h, w});
    const size_t expect = (shape.elements() + 7) / 8;
    if (payload.size() - 8 != expect)
        throw FormatError("feature payload: got " + std::to_string(payload.size() - 8) +
                          " spike bytes, expected " + std::to_string(expect));
    // from_packed enforces the zero-pad invariant (FormatError on corruption).
    return SpikeTensor::from_packed(shape,
                                    std::vector<uint8_t>(payload.begin() + 8,
                                                         payload.end()));
}

std::vector<uint8_t> encode_logits_payload(std::span<const float> logits) {
    if (logits.empty() || logits.size() > 0xFFFF)
        throw ProtocolError("logits payload: class count out of range");
    std::vector<uint8_t> out;
    out.reserve(2 + 4 * logits.size());
    put_u16(out, static_cast<uint16_t>(logits.size()));
    for (float v : logits) {
        if (!std::isfinite(v))
            throw ProtocolError("logits payload: non-finite value");
        put_u32(out, std::bit_cast<uint32_t>(v));
    }
    return out;
}

std::vector<float> decode_logits_payload(std::span<const uint8_t> payload) {
    if (payload.size() < 2)
        throw FramingError("logits payload: truncated count");
    const uint16_t k = get_u16(payload, 0);
    if (payload.size() != 2 + 4 * static_cast<size_t>(k))
        throw FormatError("logits payload: length does not match class count");
    std::vector<float> out(k);
    for (size_t i = 0; i < k; ++i) {
        out[i] = std::bit_cast<float>(get_u32(payload, 2 + 4 * i));
        if (!std::isfinite(out[i]))
            throw ProtocolError("logits payload: non-finite value");
    }
    return out;
}

std::vector<uint8_t> encode_hello_payload(uint64_t digest) {
    std::vector<uint8_t> out;
    put_u32(out, static_cast<uint32_t>(digest >> 32));
    put_u32(out, static_cast<uint32_t>(digest));
    return out;
}

uint64_t decode_hello_payload(std::span<const uint8_t> payload) {
    if (payload.size() != 8)
        throw ProtocolError("hello payload: expected 8-byte digest");
    return static_cast<uint64_t>(get_u32(payload, 0)) << 32 | get_u32(payload, 4);
}

std::vector<uint8_t> encode_error_payload(const std::string &text) {
    return std::vector<uint8_t>(text.begin(), text.end());
}

std::string decode_error_payload(std::span<const uint8_t> payload) {
    return std::string(payload.begin(), payload.end());
}

} // namespace neucodex
