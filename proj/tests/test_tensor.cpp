#include <doctest.h>

#include <limits>

#include "neucodex/rng.hpp"
#include "neucodex/tensor.hpp"

using namespace neucodex;

TEST_SUITE("tensor") {

TEST_CASE("pack_bits bit layout") {
    const std::vector<uint8_t> nine = {1, 0, 0, 0, 0, 0, 0, 0, 1};
    CHECK(pack_bits(nine) == std::vector<uint8_t>{0x80, 0x80});
    CHECK(pack_bits(std::vector<uint8_t>{}) == std::vector<uint8_t>{});
    CHECK(pack_bits(std::vector<uint8_t>(16, 1)) ==
          std::vector<uint8_t>{0xFF, 0xFF});
}

TEST_CASE("pack_bits rejects non-binary values") {
    CHECK_THROWS_AS(pack_bits(std::vector<uint8_t>{0, 2}), DomainError);
    CHECK_THROWS_AS(pack_bits(std::vector<uint8_t>{255}), DomainError);
}

TEST_CASE("unpack_bits examples and errors") {
    CHECK(unpack_bits(std::vector<uint8_t>{0x80}, 1) == std::vector<uint8_t>{1});
    CHECK(unpack_bits(std::vector<uint8_t>{0xA0}, 3) ==
          std::vector<uint8_t>{1, 0, 1});
    // nonzero pad bit signals corruption
    CHECK_THROWS_AS(unpack_bits(std::vector<uint8_t>{0x01}, 1), FormatError);
    // length mismatch
    CHECK_THROWS_AS(unpack_bits(std::vector<uint8_t>{0x00, 0x00}, 3), FormatError);
    CHECK_THROWS_AS(unpack_bits(std::vector<uint8_t>{}, 3), FormatError);
}

TEST_CASE("pack/unpack roundtrip property") {
    SplitMix64 rng(0xBEEF);
    for (size_t n : {0ul, 1ul, 7ul, 8ul, 9ul, 63ul, 64ul, 1000ul, 100000ul}) {
        std::vector<uint8_t> bits(n);
        for (auto &b : bits)
            b = rng.next() & 1;
        const auto packed = pack_bits(bits);
        CHECK(packed.size() == (n + 7) / 8); // payload size exact
        CHECK(unpack_bits(packed, n) == bits);
    }
}

TEST_CASE("shape invariants") {
    CHECK_THROWS_AS(Shape({0}), DomainError);
    CHECK_THROWS_AS(Shape(std::vector<uint32_t>{}), DomainError);
    CHECK_THROWS_AS(Shape({70000, 70000}), DomainError); // >= 2^32 elements
    CHECK(Shape({512, 4, 4}).elements() == 8192);
    CHECK(Shape({2, 3}).to_string() == "(2,3)");
}

TEST_CASE("firing_rate") {
    CHECK(firing_rate(SpikeTensor::zeros(Shape({2, 4, 4}))) == 0.0);

    const Shape s({2, 4, 4});
    CHECK(firing_rate(SpikeTensor::from_values(
              s, std::vector<uint8_t>(s.elements(), 1))) == 1.0);

    // popcount oracle: place 8 ones among 32 elements by hand
    std::vector<uint8_t> v(32, 0);
    for (size_t i = 0; i < 32; i += 4)
        v[i] = 1;
    size_t expected_ones = 0;
    for (uint8_t b : v)
        expected_ones += b;
    CHECK(expected_ones == 8);
    CHECK(firing_rate(SpikeTensor::from_values(Shape({32}), v)) == 0.25);
}

TEST_CASE("firing_rate invariant under shape reinterpretation") {
    SplitMix64 rng(7);
    std::vector<uint8_t> v(64);
    for (auto &b : v)
        b = rng.next() & 1;
    const double r1 = firing_rate(SpikeTensor::from_values(Shape({64}), v));
    const double r2 = firing_rate(SpikeTensor::from_values(Shape({2, 4, 8}), v));
    const double r3 = firing_rate(SpikeTensor::from_values(Shape({4, 16}), v));
    CHECK(r1 == r2);
    CHECK(r2 == r3);
}

TEST_CASE("SpikeTensor from_packed validates pad bits") {
    CHECK_THROWS_AS(SpikeTensor::from_packed(Shape({3}), {0x01}), FormatError);
    CHECK_THROWS_AS(SpikeTensor::from_packed(Shape({9}), {0xFF}), FormatError);
    const SpikeTensor t = SpikeTensor::from_packed(Shape({3}), {0xA0});
    CHECK(t.values() == std::vector<uint8_t>{1, 0, 1});
    CHECK(t.ones() == 2);
}

TEST_CASE("dense tensor sanity") {
    CHECK_THROWS_AS(DenseTensor(Shape({4}), {1.0f, 2.0f}), DomainError);
    DenseTensor d = DenseTensor::zeros(Shape({2, 2}));
    d.data[3] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(d.check_finite("test"), DomainError);
    CHECK(activity_fraction(d) == 0.25);
}

} // TEST_SUITE
