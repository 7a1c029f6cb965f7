#include <doctest.h>

#include <cmath>

#include "neucodex/bottleneck.hpp"
#include "neucodex/model_io.hpp"
#include "neucodex/rng.hpp"

using namespace neucodex;

namespace {

Bottleneck seeded_codec(BottleneckConfig cfg, uint64_t seed) {
    Bottleneck b(std::move(cfg));
    SplitMix64 rng(seed);
    auto fill = [&rng](DenseTensor &t, float scale) {
        for (float &v : t.data)
            v = (2.0f * rng.next_float() - 1.0f) * scale;
    };
    fill(b.enc_conv.weight, 0.2f);
    fill(b.dec_conv.weight, 0.2f);
    return b;
}

SpikeTensor random_spikes(const Shape &s, uint64_t seed, double rate = 0.4) {
    SplitMix64 rng(seed);
    std::vector<uint8_t> v(s.elements());
    for (auto &b : v)
        b = rng.next_double() < rate ? 1 : 0;
    return SpikeTensor::from_values(s, v);
}

} // namespace

TEST_SUITE("codec") {

TEST_CASE("config validation") {
    BottleneckConfig cfg;
    cfg.in_shape = Shape({512, 4, 4});
    cfg.code_channels = 4;
    cfg.kernel = 4;
    cfg.stride = 4;
    cfg.validate();
    CHECK(cfg.code_shape() == Shape({4, 1, 1}));

    // code must be strictly smaller than the input
    BottleneckConfig big;
    big.in_shape = Shape({1, 2, 2});
    big.code_channels = 16;
    big.kernel = 1;
    big.stride = 1;
    CHECK_THROWS_AS(big.validate(), DomainError);

    // decoder must restore the input extent exactly
    BottleneckConfig skew;
    skew.in_shape = Shape({8, 5, 5});
    skew.code_channels = 1;
    skew.kernel = 2;
    skew.stride = 2;
    CHECK_THROWS_AS(skew.validate(), DomainError);
}

TEST_CASE("default bottleneck reproduces the deepest-split code shape") {
    const BottleneckConfig sp7 = default_bottleneck(Shape({512, 4, 4}), 4);
    CHECK(sp7.code_shape() == Shape({4, 1, 1}));
    const BottleneckConfig sp1 = default_bottleneck(Shape({16, 32, 32}), 4);
    CHECK(sp1.code_shape() == Shape({4, 4, 4}));
    const BottleneckConfig sp5 = default_bottleneck(Shape({64, 8, 8}), 4);
    CHECK(sp5.code_shape() == Shape({4, 2, 2}));
}

TEST_CASE("zero input with zero state propagates to a zero code") {
    BottleneckConfig cfg;
    cfg.in_shape = Shape({8, 4, 4});
    cfg.code_channels = 2;
    cfg.kernel = 2;
    cfg.stride = 2;
    Bottleneck b = seeded_codec(cfg, 3);
    CodecStates st(b);
    const SpikeTensor z = bottleneck_encode(b, st, SpikeTensor::zeros(cfg.in_shape));
    CHECK(z.ones() == 0);
    const SpikeTensor xh = bottleneck_decode(b, st, SpikeTensor::zeros(cfg.code_shape()));
    CHECK(xh.ones() == 0);
}

TEST_CASE("shapes, binarity and determinism with seeded weights") {
    BottleneckConfig cfg;
    cfg.in_shape = Shape({16, 8, 8});
    cfg.code_channels = 4;
    cfg.kernel = 4;
    cfg.stride = 4;
    Bottleneck b = seeded_codec(cfg, 17);

    const SpikeTensor x = random_spikes(cfg.in_shape, 5);
    CodecStates st1(b), st2(b);
    const SpikeTensor z1 = bottleneck_encode(b, st1, x);
    const SpikeTensor z2 = bottleneck_encode(b, st2, x);
    CHECK(z1.shape() == cfg.code_shape());
    CHECK(z1 == z2); // byte-identical across runs
    for (uint8_t v : z1.values())
        CHECK(v <= 1);

    const SpikeTensor xh = bottleneck_decode(b, st1, z1);
    CHECK(xh.shape() == cfg.in_shape); // decode(encode(x)) shape contract
    const double rate = firing_rate(xh);
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);

    CHECK_THROWS_AS(bottleneck_encode(b, st1, random_spikes(Shape({4, 8, 8}), 1)),
                    DomainError);
    CHECK_THROWS_AS(bottleneck_decode(b, st1, random_spikes(Shape({1, 1, 1}), 1)),
                    DomainError);
}

TEST_CASE("encoder state carries across timesteps; reset restores it") {
    // One input channel, all-ones input, conv weight 0.35*4 = 1.4 total drive:
    // h(1) = 0.7 (no spike), h(2) = 1.05 (spike) - provably state-dependent.
    BottleneckConfig cfg;
    cfg.in_shape = Shape({1, 2, 2});
    cfg.code_channels = 1;
    cfg.kernel = 2;
    cfg.stride = 2;
    Bottleneck b(cfg);
    std::fill(b.enc_conv.weight.data.begin(), b.enc_conv.weight.data.end(), 0.35f);
    CodecStates st(b);

    const SpikeTensor x =
        SpikeTensor::from_values(cfg.in_shape, std::vector<uint8_t>(4, 1));
    const SpikeTensor z1 = bottleneck_encode(b, st, x);
    const SpikeTensor z2 = bottleneck_encode(b, st, x);
    CHECK(z1.ones() == 0);
    CHECK(z2.ones() == 1);
    CHECK_FALSE(z1 == z2);

    st.reset();
    const SpikeTensor z1_again = bottleneck_encode(b, st, x);
    CHECK(z1_again == z1);
}

TEST_CASE("payload arithmetic") {
    CHECK(payload_bits(Shape({512, 4, 4}), 2) == 16384);
    CHECK(payload_bits(Shape({4, 1, 1}), 2) == 8);
    CHECK(payload_bits(Shape({99, 3, 3}), 0) == 0);
}

TEST_CASE("compression ratios") {
    CHECK(compression_ratio(16384, 8) == 2048.0);
    CHECK(compression_ratio(1234, 1234) == 1.0);
    const double r = compression_ratio(131072, 854);
    CHECK(r == doctest::Approx(153.48).epsilon(1e-3));
    CHECK(r > 153.0);
    CHECK(r < 154.0);
    CHECK_THROWS_AS(compression_ratio(100, 0), DomainError);
}

TEST_CASE("ratio is independent of the timestep count") {
    const Shape in({64, 8, 8});
    const Shape code({4, 2, 2});
    const double r1 = compression_ratio(payload_bits(in, 1), payload_bits(code, 1));
    const double r2 = compression_ratio(payload_bits(in, 2), payload_bits(code, 2));
    const double r8 = compression_ratio(payload_bits(in, 8), payload_bits(code, 8));
    CHECK(r1 == r2);
    CHECK(r2 == r8);
}

} // TEST_SUITE
