#pragma once

#include <cstdint>
#include <string_view>

namespace neucodex {

// SplitMix64 (Steele/Lea/Flood). The whole generator is a handful of integer
// ops, which makes seeded weight containers and rate-coded inputs
// byte-identical across platforms and implementations. Documented in the
// README as part of the reproducibility contract.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0,1), 24 random bits; every value is exact in float.
    float next_float() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

  private:
    uint64_t state_;
};

// FNV-1a, 64-bit. Used for per-entry stream names and config digests.
constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent stream seed from a base seed and a stream id.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    SplitMix64 g(base ^ (stream * 0xA24BAED4963EE407ULL));
    return g.next();
}

inline uint64_t derive_seed(uint64_t base, std::string_view stream_name) {
    return derive_seed(base, fnv1a64(stream_name));
}

} // namespace neucodex
