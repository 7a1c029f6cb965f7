#pragma once

#include <cstdint>
#include <string>

#include "neucodex/layers.hpp"

namespace neucodex {

// Conv/BN/LIF encoder on the edge paired with a transposed-conv/BN/LIF
// decoder on the cloud. The same kernel/stride/padding is used for both so
// the decoder restores the input shape exactly.
struct BottleneckConfig {
    Shape in_shape;            // (C,H,W) at the split
    uint32_t code_channels = 4; // C'
    uint32_t kernel = 4, stride = 4, padding = 0;
    LifParams lif;

    Shape code_shape() const;
    void validate() const; // code element count < in element count; shapes chain
    std::string describe() const;
};

// Default spatial reduction for a split shape: collapse to 1x1 when the map
// is already 4x4 or smaller, otherwise shrink by 8x (32px and up) or 4x.
BottleneckConfig default_bottleneck(const Shape &split_shape, uint32_t code_channels);

// Immutable weights; per-session membrane state lives in CodecStates.
struct Bottleneck {
    BottleneckConfig cfg;
    LayerSpec enc_conv, enc_bn;
    LayerSpec dec_conv, dec_bn;

    explicit Bottleneck(BottleneckConfig c);
};

struct CodecStates {
    LifState enc, dec;

    explicit CodecStates(const Bottleneck &b);
    void reset();
};

// Mean input activity of the encoder stages, accumulated per timestep.
// Feeds the edge-side energy accounting for the codec's own work.
struct CodecActivity {
    double conv_in_sum = 0.0;
    double bn_in_sum = 0.0;
    uint32_t steps = 0;
};

// Z_t = LIF(BN(Conv(x))). Encoder membrane state persists across the
// timesteps of one sample.
SpikeTensor bottleneck_encode(const Bottleneck &b, CodecStates &st,
                              const SpikeTensor &x,
                              CodecActivity *probe = nullptr);

// X_hat_t = LIF(BN(ConvTranspose(z))). Reconstruction is lossy by design;
// only shape and binarity are guaranteed.
SpikeTensor bottleneck_decode(const Bottleneck &b, CodecStates &st,
                              const SpikeTensor &z);

// Logical (pre-padding) bits for sending `timesteps_sent` tensors of this shape.
uint64_t payload_bits(const Shape &shape, uint64_t timesteps_sent);

// raw / coded. Throws DomainError when coded == 0.
double compression_ratio(uint64_t raw_bits, uint64_t coded_bits);

} // namespace neucodex
