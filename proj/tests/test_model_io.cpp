#include <doctest.h>

#include <bit>
#include <cmath>

#include "neucodex/model_io.hpp"
#include "neucodex/rng.hpp"

using namespace neucodex;

TEST_SUITE("model_io") {

TEST_CASE("crc32 standard check value") {
    const std::string s = "123456789";
    CHECK(crc32_ieee(std::span<const uint8_t>(
              reinterpret_cast<const uint8_t *>(s.data()), s.size())) == 0xCBF43926u);
}

TEST_CASE("empty container roundtrip") {
    const auto bytes = save_container({});
    CHECK(bytes.size() == 8 + 4 + 4); // magic + count + crc
    CHECK(load_container(bytes).empty());
}

TEST_CASE("containers roundtrip bit-exactly") {
    SplitMix64 rng(8);
    std::vector<WeightEntry> entries;
    WeightEntry conv{"layers.0.weight", Shape({4, 3, 3, 3}), {}};
    conv.values.resize(conv.shape.elements());
    for (float &v : conv.values)
        v = 2.0f * rng.next_float() - 1.0f;
    entries.push_back(conv);
    entries.push_back({"layers.1.bn_scale", Shape({4}), {1.0f, -0.0f, 3.5f, 1e-30f}});

    const auto bytes = save_container(entries);
    const auto loaded = load_container(bytes);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].name == "layers.0.weight");
    CHECK(loaded[0].shape == conv.shape);
    // bit-exact, including the negative zero
    for (size_t i = 0; i < conv.values.size(); ++i)
        CHECK(std::bit_cast<uint32_t>(loaded[0].values[i]) ==
              std::bit_cast<uint32_t>(conv.values[i]));
    CHECK(std::signbit(loaded[1].values[1]));
}

TEST_CASE("corruption and structural errors") {
    std::vector<WeightEntry> entries{{"w", Shape({2}), {1.0f, 2.0f}}};
    auto bytes = save_container(entries);

    SUBCASE("flipped payload byte fails the CRC") {
        bytes[bytes.size() - 8] ^= 0x40;
        CHECK_THROWS_AS(load_container(bytes), IntegrityError);
    }
    SUBCASE("bad magic") {
        bytes[0] = 'X';
        CHECK_THROWS_AS(load_container(bytes), IntegrityError);
    }
    SUBCASE("truncation") {
        bytes.resize(bytes.size() - 5);
        CHECK_THROWS_AS(load_container(bytes), IntegrityError);
    }
    SUBCASE("duplicate names refuse to serialize") {
        entries.push_back({"w", Shape({1}), {3.0f}});
        CHECK_THROWS_AS(save_container(entries), IntegrityError);
    }
}

TEST_CASE("seeded init is deterministic and seed-sensitive") {
    const NetworkGraph net = make_resnet_mini(3, 10);
    const auto a = save_container(seeded_init(net, 42));
    const auto b = save_container(seeded_init(net, 42));
    const auto c = save_container(seeded_init(net, 43));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("He-style variance within 20% of 2/fan_in") {
    const NetworkGraph net = make_resnet_mini(3, 10);
    const auto entries = seeded_init(net, 7);
    // layer 16 is the 1x1 conv 128->512: fan_in 128, 65536 samples
    for (const auto &e : entries) {
        if (e.name != "layers.16.weight")
            continue;
        const double fan_in = 128.0;
        double mean = 0.0;
        for (float v : e.values)
            mean += v;
        mean /= static_cast<double>(e.values.size());
        double var = 0.0;
        for (float v : e.values)
            var += (v - mean) * (v - mean);
        var /= static_cast<double>(e.values.size());
        const double target = 2.0 / fan_in;
        CHECK(var > 0.8 * target);
        CHECK(var < 1.2 * target);
        return;
    }
    FAIL("layers.16.weight not found");
}

TEST_CASE("apply rejects mismatched shapes and unknown names") {
    NetworkGraph net = make_resnet_mini(3, 10);
    std::vector<WeightEntry> wrong{{"layers.0.weight", Shape({1}), {1.0f}}};
    CHECK_THROWS_AS(apply_entries(net, nullptr, wrong), IntegrityError);
    std::vector<WeightEntry> unknown{{"layers.999.weight", Shape({1}), {1.0f}}};
    CHECK_THROWS_AS(apply_entries(net, nullptr, unknown), IntegrityError);
    // codec entries are skipped when the node runs without a bottleneck
    std::vector<WeightEntry> codec_only{
        {"bottleneck.encoder.conv.bias", Shape({1}), {0.0f}}};
    CHECK_NOTHROW(apply_entries(net, nullptr, codec_only));
}

TEST_CASE("config digest keys on topology, codec and weights") {
    const NetworkGraph resnet = make_resnet_mini(3, 10);
    const NetworkGraph vgg = make_vgg_mini(3, 10);
    const Bottleneck codec(default_bottleneck(Shape({512, 4, 4}), 4));

    CHECK(config_digest(resnet, nullptr, 1) == config_digest(resnet, nullptr, 1));
    CHECK(config_digest(resnet, nullptr, 1) != config_digest(resnet, nullptr, 2));
    CHECK(config_digest(resnet, nullptr, 1) != config_digest(vgg, nullptr, 1));
    CHECK(config_digest(resnet, &codec, 1) != config_digest(resnet, nullptr, 1));
}

TEST_CASE("seeded containers carry codec entries under the reserved prefix") {
    const NetworkGraph net = make_resnet_mini(3, 10);
    const Bottleneck codec(default_bottleneck(Shape({512, 4, 4}), 4));
    const auto entries = seeded_init(net, &codec, 11);
    bool enc = false, dec = false;
    for (const auto &e : entries) {
        enc |= e.name == "bottleneck.encoder.conv.weight";
        dec |= e.name == "bottleneck.decoder.conv.weight";
    }
    CHECK(enc);
    CHECK(dec);
}

} // TEST_SUITE
