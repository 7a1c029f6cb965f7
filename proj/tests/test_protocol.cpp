#include <doctest.h>

#include <bit>
#include <fstream>

#include "neucodex/protocol.hpp"
#include "neucodex/rng.hpp"

using namespace neucodex;

namespace {

std::vector<uint8_t> read_file(const std::string &name) {
    std::ifstream f(std::string(GOLDEN_DIR) + "/" + name, std::ios::binary);
    REQUIRE(f.good());
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
}

} // namespace

TEST_SUITE("protocol") {

TEST_CASE("hello encodes to 14 bytes with the fixed prefix") {
    const auto bytes =
        encode_message(MessageHeader{MsgType::Hello, 42, 1, 0, 0}, {});
    REQUIRE(bytes.size() == 14);
    CHECK(bytes[0] == 0x4E);
    CHECK(bytes[1] == 0x43);
    CHECK(bytes[2] == 0x01);
    CHECK(bytes[3] == 0x00);
}

TEST_CASE("golden fixtures decode and re-encode byte-identically") {
    SUBCASE("hello") {
        const auto bytes = read_file("hello.bin");
        const Message m = decode_message(bytes);
        CHECK(m.header.type == MsgType::Hello);
        CHECK(m.header.session_id == 42);
        CHECK(m.header.timestep == 1);
        CHECK(m.header.flags == 0);
        CHECK(m.payload.empty());
        CHECK(encode_message(m.header, m.payload) == bytes);
    }
    SUBCASE("feature") {
        const auto bytes = read_file("feature.bin");
        const Message m = decode_message(bytes);
        CHECK(m.header.type == MsgType::Feature);
        CHECK(m.header.flags == kFlagCompressed);
        CHECK(m.header.payload_len == 9);
        const SpikeTensor t = decode_feature_payload(m.payload);
        CHECK(t.shape() == Shape({4, 1, 1}));
        CHECK(t.values() == std::vector<uint8_t>{1, 0, 1, 1});
        CHECK(encode_message(m.header, encode_feature_payload(t)) == bytes);
    }
    SUBCASE("logits") {
        const auto bytes = read_file("logits.bin");
        const Message m = decode_message(bytes);
        CHECK(m.header.type == MsgType::Logits);
        CHECK(m.header.timestep == 2);
        const auto logits = decode_logits_payload(m.payload);
        CHECK(logits == std::vector<float>{1.0f, -2.0f, 0.5f});
        CHECK(encode_message(m.header, encode_logits_payload(logits)) == bytes);
    }
    SUBCASE("exit") {
        const auto bytes = read_file("exit.bin");
        const Message m = decode_message(bytes);
        CHECK(m.header.type == MsgType::Exit);
        CHECK(m.header.timestep == 2); // carries t_exit
        CHECK(m.payload.empty());
    }
    SUBCASE("error") {
        const auto bytes = read_file("error.bin");
        const Message m = decode_message(bytes);
        CHECK(m.header.type == MsgType::Error);
        CHECK(decode_error_payload(m.payload) == "bad shape");
    }
}

TEST_CASE("feature payload layout for (4,1,1) is 8 shape bytes + 1 packed byte") {
    const SpikeTensor t =
        SpikeTensor::from_values(Shape({4, 1, 1}), std::vector<uint8_t>{1, 0, 1, 1});
    const auto payload = encode_feature_payload(t);
    REQUIRE(payload.size() == 9);
    CHECK(payload[1] == 4);  // C
    CHECK(payload[3] == 1);  // H
    CHECK(payload[5] == 1);  // W
    CHECK(payload[6] == 0);  // reserved
    CHECK(payload[7] == 0);
    CHECK(payload[8] == 0xB0);
}

TEST_CASE("decode errors are distinct by failure class") {
    auto good = encode_message(MessageHeader{MsgType::Exit, 7, 3, 0, 0}, {});

    SUBCASE("bad magic -> ProtocolError") {
        good[0] = 0x00;
        CHECK_THROWS_AS(decode_message(good), ProtocolError);
    }
    SUBCASE("unknown version -> ProtocolError") {
        good[2] = 0x02;
        CHECK_THROWS_AS(decode_message(good), ProtocolError);
    }
    SUBCASE("unknown type -> ProtocolError") {
        good[3] = 0x09;
        CHECK_THROWS_AS(decode_message(good), ProtocolError);
    }
    SUBCASE("short header -> FramingError") {
        good.resize(10);
        CHECK_THROWS_AS(decode_message(good), FramingError);
    }
    SUBCASE("declared payload longer than the buffer -> FramingError") {
        good[13] = 10; // payload_len = 10, but zero bytes follow
        CHECK_THROWS_AS(decode_message(good), FramingError);
    }
    SUBCASE("trailing bytes -> ProtocolError") {
        good.push_back(0xAA);
        CHECK_THROWS_AS(decode_message(good), ProtocolError);
    }
    SUBCASE("zero timestep -> ProtocolError") {
        good[8] = 0;
        CHECK_THROWS_AS(decode_message(good), ProtocolError);
    }
}

TEST_CASE("payload codec errors") {
    // nonzero pad bit in the spike bytes -> FormatError (corruption)
    std::vector<uint8_t> payload{0, 4, 0, 1, 0, 1, 0, 0, 0xB1};
    CHECK_THROWS_AS(decode_feature_payload(payload), FormatError);
    // wrong spike byte count -> FormatError
    std::vector<uint8_t> short_payload{0, 9, 0, 1, 0, 1, 0, 0, 0xB0};
    CHECK_THROWS_AS(decode_feature_payload(short_payload), FormatError);
    // nonzero reserved extent -> ProtocolError
    std::vector<uint8_t> reserved{0, 4, 0, 1, 0, 1, 0, 1, 0xB0};
    CHECK_THROWS_AS(decode_feature_payload(reserved), ProtocolError);
    // logits length mismatch -> FormatError
    std::vector<uint8_t> logits{0, 2, 0, 0, 0, 0};
    CHECK_THROWS_AS(decode_logits_payload(logits), FormatError);
    // hello digest must be exactly 8 bytes
    CHECK_THROWS_AS(decode_hello_payload(std::vector<uint8_t>{1, 2, 3}),
                    ProtocolError);
}

TEST_CASE("roundtrip property over randomized messages") {
    SplitMix64 rng(0xC0DE);
    for (int i = 0; i < 1000; ++i) {
        MessageHeader h;
        h.type = static_cast<MsgType>(rng.next() % 5);
        h.session_id = static_cast<uint32_t>(rng.next());
        h.timestep = static_cast<uint8_t>(1 + rng.next() % 255);
        h.flags = static_cast<uint8_t>(rng.next() & 1);
        std::vector<uint8_t> payload(rng.next() % 300);
        for (auto &b : payload)
            b = static_cast<uint8_t>(rng.next());
        const auto bytes = encode_message(h, payload);
        const Message m = decode_message(bytes);
        CHECK(m.header.type == h.type);
        CHECK(m.header.session_id == h.session_id);
        CHECK(m.header.timestep == h.timestep);
        CHECK(m.header.flags == h.flags);
        CHECK(m.header.payload_len == payload.size());
        CHECK(m.payload == payload);
        CHECK(bytes.size() == kHeaderSize + payload.size());
    }
}

TEST_CASE("logits payload roundtrips float bits exactly") {
    const std::vector<float> logits{0.0f, -0.0f, 1e-38f, -123.456f, 3.14159f};
    const auto loaded = decode_logits_payload(encode_logits_payload(logits));
    REQUIRE(loaded.size() == logits.size());
    for (size_t i = 0; i < logits.size(); ++i)
        CHECK(std::bit_cast<uint32_t>(loaded[i]) == std::bit_cast<uint32_t>(logits[i]));
}

} // TEST_SUITE
