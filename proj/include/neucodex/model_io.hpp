#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neucodex/bottleneck.hpp"
#include "neucodex/network.hpp"

namespace neucodex {

// One named float32 tensor inside a weights container.
struct WeightEntry {
    std::string name;
    Shape shape;
    std::vector<float> values;
};

// Container layout (all integers big-endian):
//   8-byte magic "NCWTS001"
//   u32 entry count
//   per entry: u16 name length, name bytes, u8 dtype (0 = float32),
//              u8 rank, rank x u32 extents, raw big-endian float32 values
//   u32 CRC-32 (IEEE, reflected poly 0xEDB88320) of all preceding bytes
std::vector<uint8_t> save_container(std::span<const WeightEntry> entries);
std::vector<WeightEntry> load_container(std::span<const uint8_t> bytes);

void save_container_file(const std::string &path,
                         std::span<const WeightEntry> entries);
std::vector<WeightEntry> load_container_file(const std::string &path);

uint32_t crc32_ieee(std::span<const uint8_t> bytes);
// CRC of a serialized container (the trailing 4 bytes).
uint32_t container_crc(std::span<const uint8_t> container_bytes);

// He-style fan-in scaled uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)),
// drawn from a per-entry SplitMix64 stream keyed by (seed, entry name), so
// the container bytes depend only on the seed and topology. BatchNorm loads
// identity statistics. Substitutes for out-of-scope training.
std::vector<WeightEntry> seeded_init(const NetworkGraph &net, uint64_t seed);
// Adds the codec entries under the reserved "bottleneck." prefix.
std::vector<WeightEntry> seeded_init(const NetworkGraph &net, const Bottleneck *codec,
                                     uint64_t seed);

// Entry names are "layers.<i>.<field>" / "bottleneck.{encoder,decoder}.<field>".
std::vector<WeightEntry> collect_entries(const NetworkGraph &net,
                                         const Bottleneck *codec);
void apply_entries(NetworkGraph &net, Bottleneck *codec,
                   std::span<const WeightEntry> entries);

// Digest both sides compare at HELLO: hash of the topology description, the
// codec description (if any), and the weights container CRC.
uint64_t config_digest(const NetworkGraph &net, const Bottleneck *codec,
                       uint32_t weights_crc);

} // namespace neucodex
