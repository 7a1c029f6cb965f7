#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "neucodex/lif.hpp"
#include "neucodex/tensor.hpp"

namespace neucodex {

enum class LayerKind {
    Conv2d,
    ConvTranspose2d,
    BatchNorm,
    Linear,
    AvgPool,
    Flatten,
    Lif,
    ResidualAdd,
};

const char *layer_kind_name(LayerKind k);

using Activation = std::variant<DenseTensor, SpikeTensor>;

const Shape &activation_shape(const Activation &a);
DenseTensor to_dense(const Activation &a);
// Fraction of nonzero / set elements; feeds the energy model.
double activation_activity(const Activation &a);

// One layer of the forward graph. Hyperparameters are fixed at build time;
// weight tensors are filled by model-io. in_* fields and shapes are resolved
// when the owning graph is finalized.
struct LayerSpec {
    LayerKind kind{};

    // Conv2d / ConvTranspose2d
    uint32_t in_ch = 0, out_ch = 0;
    uint32_t kernel = 0, stride = 1, padding = 0;
    // Linear
    uint32_t in_features = 0, out_features = 0;
    // AvgPool
    uint32_t window = 0;
    // ResidualAdd: index of the layer whose output is added; -1 = unset.
    int32_t residual_from = -1;
    // Lif
    LifParams lif;

    DenseTensor weight; // conv: (OC,IC,K,K); convT: (IC,OC,K,K); linear: (out,in)
    DenseTensor bias;
    DenseTensor bn_scale, bn_shift, bn_mean, bn_var; // per-channel

    static constexpr float kBnEps = 1e-5f;

    static LayerSpec conv2d(uint32_t out_ch, uint32_t kernel, uint32_t stride,
                            uint32_t padding);
    static LayerSpec conv_transpose2d(uint32_t out_ch, uint32_t kernel,
                                      uint32_t stride, uint32_t padding);
    static LayerSpec batchnorm();
    static LayerSpec linear(uint32_t out_features);
    static LayerSpec avgpool(uint32_t window);
    static LayerSpec flatten();
    static LayerSpec lif_layer(LifParams p = {});
    static LayerSpec residual_add(int32_t from_layer);

    // Resolves in_* from the incoming shape, allocates zeroed weights, and
    // returns the output shape. Throws DomainError on an impossible chain.
    Shape finalize(const Shape &in);
    Shape out_shape(const Shape &in) const;

    bool has_weights() const;
    // True when the layer holds a LIF state (kind == Lif).
    bool is_stateful() const { return kind == LayerKind::Lif; }

    // 2*K*K*Cin*Cout*Hout*Wout for conv, 2*Nin*Nout for linear, elementwise
    // counts for BN/pool/residual, 0 for Flatten and Lif.
    uint64_t flops(const Shape &in) const;
};

// residual_source: activation referenced by ResidualAdd, resolved by the
// graph executor; null for every other kind.
Activation layer_forward(const LayerSpec &layer, const Activation &input,
                         LifState *state, const Activation *residual_source);

} // namespace neucodex
