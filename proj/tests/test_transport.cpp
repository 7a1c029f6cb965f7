#include <doctest.h>

#include <bit>
#include <cmath>
#include <thread>

#include "neucodex/protocol.hpp"
#include "neucodex/transport.hpp"

using namespace neucodex;

TEST_SUITE("transport") {

TEST_CASE("transmission time model") {
    ChannelModel ch; // 18.9 Mbps, zero delay

    // division oracle evaluated independently
    const double t = transmission_time(16384, ch);
    const double oracle = 16384.0 / 18.9e6;
    CHECK(std::abs(t - oracle) <= 1e-9 * oracle);
    CHECK(std::abs(t - 8.669e-4) < 5e-8); // 4-significant-digit window

    const double t8 = transmission_time(8, ch);
    CHECK(std::abs(t8 - 8.0 / 18.9e6) <= 1e-15);
    CHECK(std::abs(t8 - 4.23e-7) < 5e-10);

    ChannelModel delayed;
    delayed.propagation_delay_s = 0.25;
    CHECK(transmission_time(0, delayed) == 0.25);
}

TEST_CASE("transmission time is strictly monotone in bits (no jitter)") {
    ChannelModel ch;
    double prev = -1.0;
    for (uint64_t bits : {0ull, 1ull, 8ull, 100ull, 10000ull, 1048576ull}) {
        const double t = transmission_time(bits, ch);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("jitter is deterministic given the seed and bounded") {
    ChannelModel ch;
    ch.jitter_frac = 0.3;
    ch.jitter_seed = 99;
    const double a = transmission_time(4096, ch);
    const double b = transmission_time(4096, ch);
    CHECK(a == b); // pure function of (bits, channel)
    const double base = 4096.0 / ch.throughput_bps;
    CHECK(a >= base);
    CHECK(a < base * 1.3 + 1e-12);

    ChannelModel other = ch;
    other.jitter_seed = 100;
    CHECK(transmission_time(4096, other) != a);
}

TEST_CASE("channel validation") {
    ChannelModel bad;
    bad.throughput_bps = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    ChannelModel jitter;
    jitter.jitter_frac = 1.0;
    CHECK_THROWS_AS(jitter.validate(), DomainError);
}

TEST_CASE("simulated link advances one shared virtual clock additively") {
    ChannelModel ch;
    SimLink link(ch);
    const std::vector<uint8_t> msg(100, 0xAB);

    const double t1 = link.edge_end().send(msg);
    const double t2 = link.edge_end().send(msg);
    const double per_msg = transmission_time(800, ch);
    CHECK(t1 == per_msg);
    CHECK(t2 == 2.0 * per_msg);
    CHECK(link.virtual_now() == t2);

    CHECK(link.cloud_end().recv() == msg);
    CHECK(link.cloud_end().recv() == msg);
    CHECK(link.edge_end().bytes_sent() == 200);
    CHECK(link.cloud_end().bytes_received() == 200);
    CHECK(link.edge_end().messages_sent() == 2);
}

TEST_CASE("simulated link delivers in order and both directions") {
    SimLink link(ChannelModel{});
    link.edge_end().send(std::vector<uint8_t>{1, 2, 3});
    link.edge_end().send(std::vector<uint8_t>{4});
    link.cloud_end().send(std::vector<uint8_t>{9, 9});
    CHECK(link.cloud_end().recv() == std::vector<uint8_t>{1, 2, 3});
    CHECK(link.cloud_end().recv() == std::vector<uint8_t>{4});
    CHECK(link.edge_end().recv() == std::vector<uint8_t>{9, 9});
}

TEST_CASE("identical configs produce identical virtual timelines") {
    std::vector<double> stamps1, stamps2;
    for (auto *stamps : {&stamps1, &stamps2}) {
        ChannelModel ch;
        ch.propagation_delay_s = 1e-4;
        SimLink link(ch);
        for (size_t n : {10ul, 200ul, 3000ul})
            stamps->push_back(link.edge_end().send(std::vector<uint8_t>(n, 1)));
    }
    CHECK(stamps1 == stamps2); // exact floating equality
}

TEST_CASE("closed simulated link raises TransportError") {
    SimLink link(ChannelModel{});
    link.close();
    CHECK_THROWS_AS(link.edge_end().send(std::vector<uint8_t>{1}), TransportError);
    CHECK_THROWS_AS(link.cloud_end().recv(), TransportError);
}

TEST_CASE("sim trace records message types in order") {
    SimLink link(ChannelModel{});
    link.edge_end().send(encode_message(MessageHeader{MsgType::Hello, 1, 1, 0, 0}, {}));
    link.cloud_end().send(encode_message(MessageHeader{MsgType::Hello, 1, 1, 0, 0}, {}));
    link.edge_end().send(encode_message(MessageHeader{MsgType::Exit, 1, 1, 0, 0}, {}));
    const auto trace = link.trace();
    REQUIRE(trace.size() == 3);
    CHECK(trace[0] == std::pair<int, uint8_t>{0, 0});
    CHECK(trace[1] == std::pair<int, uint8_t>{1, 0});
    CHECK(trace[2] == std::pair<int, uint8_t>{0, 3});
}

TEST_CASE("tcp loopback carries the same bytes as the simulated link") {
    TcpListener listener("127.0.0.1", 0);
    const uint16_t port = listener.port();

    std::vector<std::vector<uint8_t>> outbound;
    outbound.push_back(encode_message(MessageHeader{MsgType::Hello, 5, 1, 0, 0},
                                      encode_hello_payload(0x1122334455667788ull)));
    outbound.push_back(encode_message(
        MessageHeader{MsgType::Feature, 5, 1, 1, 0},
        encode_feature_payload(SpikeTensor::from_values(
            Shape({4, 1, 1}), std::vector<uint8_t>{1, 0, 1, 1}))));
    outbound.push_back(encode_message(MessageHeader{MsgType::Exit, 5, 1, 0, 0}, {}));

    std::thread server([&] {
        auto conn = listener.accept();
        for (size_t i = 0; i < outbound.size(); ++i) {
            const auto got = conn->recv();
            conn->send(got); // echo
        }
        conn->close();
    });

    auto client = tcp_connect("127.0.0.1", port);
    for (const auto &msg : outbound) {
        client->send(msg);
        CHECK(client->recv() == msg); // boundaries and bytes preserved
    }
    CHECK(client->bytes_sent() == client->bytes_received());
    CHECK(client->messages_sent() == outbound.size());
    server.join();

    // peer closed: next recv fails with TransportError
    CHECK_THROWS_AS(client->recv(), TransportError);
}

TEST_CASE("tcp connect to a dead port fails with TransportError") {
    CHECK_THROWS_AS(tcp_connect("127.0.0.1", 1, 0.2), TransportError);
}

} // TEST_SUITE
