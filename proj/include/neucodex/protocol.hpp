#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neucodex/tensor.hpp"

namespace neucodex {

// Wire layout (all integers big-endian), total 14 bytes:
//   magic 0x4E 0x43 | version 0x01 | msg_type u8 | session_id u32 |
//   timestep u8 (1-based) | flags u8 (bit0 = bottleneck-compressed) |
//   payload_len u32
enum class MsgType : uint8_t {
    Hello = 0,
    Feature = 1,
    Logits = 2,
    Exit = 3,
    Error = 4,
};

constexpr uint8_t kProtocolMagic0 = 0x4E;
constexpr uint8_t kProtocolMagic1 = 0x43;
constexpr uint8_t kProtocolVersion = 0x01;
constexpr size_t kHeaderSize = 14;
constexpr uint8_t kFlagCompressed = 0x01;

struct MessageHeader {
    MsgType type = MsgType::Hello;
    uint32_t session_id = 0;
    uint8_t timestep = 1;
    uint8_t flags = 0;
    uint32_t payload_len = 0;

    bool operator==(const MessageHeader &) const = default;
};

struct Message {
    MessageHeader header;
    std::vector<uint8_t> payload;

    bool operator==(const Message &) const = default;
};

std::vector<uint8_t> encode_message(const MessageHeader &header,
                                    std::span<const uint8_t> payload);

// Decodes exactly one message. Bad magic/version/type/trailing bytes ->
// ProtocolError; too few bytes for the declared lengths -> FramingError.
Message decode_message(std::span<const uint8_t> bytes);

// FEATURE payload: 4 x u16 extents (C,H,W,reserved=0) + packed spike bits.
std::vector<uint8_t> encode_feature_payload(const SpikeTensor &t);
SpikeTensor decode_feature_payload(std::span<const uint8_t> payload);

// LOGITS payload: u16 class count + that many big-endian float32 values.
std::vector<uint8_t> encode_logits_payload(std::span<const float> logits);
std::vector<float> decode_logits_payload(std::span<const uint8_t> payload);

// HELLO payload: u64 config digest.
std::vector<uint8_t> encode_hello_payload(uint64_t digest);
uint64_t decode_hello_payload(std::span<const uint8_t> payload);

// ERROR payload: UTF-8 message.
std::vector<uint8_t> encode_error_payload(const std::string &text);
std::string decode_error_payload(std::span<const uint8_t> payload);

} // namespace neucodex
