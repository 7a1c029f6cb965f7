#include "neucodex/layers.hpp"

#include "neucodex/kernels.hpp"

namespace neucodex {

const char *layer_kind_name(LayerKind k) {
    switch (k) {
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::ConvTranspose2d: return "conv_transpose2d";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Linear: return "linear";
    case LayerKind::AvgPool: return "avgpool";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Lif: return "lif";
    case LayerKind::ResidualAdd: return "residual_add";
    }
    return "?";
}

const Shape &activation_shape(const Activation &a) {
    if (const auto *d = std::get_if<DenseTensor>(&a))
        return d->shape;
    return std::get<SpikeTensor>(a).shape();
}

DenseTensor to_dense(const Activation &a) {
    if (const auto *d = std::get_if<DenseTensor>(&a))
        return *d;
    return std::get<SpikeTensor>(a).to_dense();
}

double activation_activity(const Activation &a) {
    if (const auto *d = std::get_if<DenseTensor>(&a))
        return activity_fraction(*d);
    return firing_rate(std::get<SpikeTensor>(a));
}

LayerSpec LayerSpec::conv2d(uint32_t out_ch, uint32_t kernel, uint32_t stride,
                            uint32_t padding) {
    LayerSpec l;
    l.kind = LayerKind::Conv2d;
    l.out_ch = out_ch;
    l.kernel = kernel;
    l.stride = stride;
    l.padding = padding;
    return l;
}

LayerSpec LayerSpec::conv_transpose2d(uint32_t out_ch, uint32_t kernel,
                                      uint32_t stride, uint32_t padding) {
    LayerSpec l;
    l.kind = LayerKind::ConvTranspose2d;
    l.out_ch = out_ch;
    l.kernel = kernel;
    l.stride = stride;
    l.padding = padding;
    return l;
}

LayerSpec LayerSpec::batchnorm() {
    LayerSpec l;
    l.kind = LayerKind::BatchNorm;
    return l;
}

LayerSpec LayerSpec::linear(uint32_t out_features) {
    LayerSpec l;
    l.kind = LayerKind::Linear;
    l.out_features = out_features;
    return l;
}

LayerSpec LayerSpec::avgpool(uint32_t window) {
    LayerSpec l;
    l.kind = LayerKind::AvgPool;
    l.window = window;
    return l;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec l;
    l.kind = LayerKind::Flatten;
    return l;
}

LayerSpec LayerSpec::lif_layer(LifParams p) {
    LayerSpec l;
    l.kind = LayerKind::Lif;
    l.lif = p;
    return l;
}

LayerSpec LayerSpec::residual_add(int32_t from_layer) {
    LayerSpec l;
    l.kind = LayerKind::ResidualAdd;
    l.residual_from = from_layer;
    return l;
}

namespace {

void require_rank3(const Shape &s, const char *what) {
    if (s.rank() != 3)
        throw DomainError(std::string(what) + ": expected rank-3 (C,H,W) input, got " +
                          s.to_string());
}

uint32_t conv_out_extent(uint32_t in, uint32_t k, uint32_t s, uint32_t p,
                         const char *what) {
    const int64_t padded = static_cast<int64_t>(in) + 2 * static_cast<int64_t>(p);
    if (padded < k)
        throw DomainError(std::string(what) + ": kernel larger than padded input");
    return static_cast<uint32_t>((padded - k) / s + 1);
}

} // namespace

Shape LayerSpec::out_shape(const Shape &in) const {
    switch (kind) {
    case LayerKind::Conv2d: {
        require_rank3(in, "conv2d");
        const uint32_t oh = conv_out_extent(in[1], kernel, stride, padding, "conv2d");
        const uint32_t ow = conv_out_extent(in[2], kernel, stride, padding, "conv2d");
        return Shape({out_ch, oh, ow});
    }
    case LayerKind::ConvTranspose2d: {
        require_rank3(in, "conv_transpose2d");
        const int64_t oh = static_cast<int64_t>(in[1] - 1) * stride -
                           2 * static_cast<int64_t>(padding) + kernel;
        const int64_t ow = static_cast<int64_t>(in[2] - 1) * stride -
                           2 * static_cast<int64_t>(padding) + kernel;
        if (oh < 1 || ow < 1)
            throw DomainError("conv_transpose2d: non-positive output extent");
        return Shape({out_ch, static_cast<uint32_t>(oh), static_cast<uint32_t>(ow)});
    }
    case LayerKind::BatchNorm:
        require_rank3(in, "batchnorm");
        return in;
    case LayerKind::Linear:
        if (in.rank() != 1)
            throw DomainError("linear: expected rank-1 input, got " + in.to_string());
        return Shape({out_features});
    case LayerKind::AvgPool: {
        require_rank3(in, "avgpool");
        if (window == 0 || in[1] % window != 0 || in[2] % window != 0)
            throw DomainError("avgpool: window must evenly divide spatial extent");
        return Shape({in[0], in[1] / window, in[2] / window});
    }
    case LayerKind::Flatten:
        return Shape({static_cast<uint32_t>(in.elements())});
    case LayerKind::Lif:
    case LayerKind::ResidualAdd:
        return in;
    }
    throw DomainError("out_shape: unknown layer kind");
}

Shape LayerSpec::finalize(const Shape &in) {
    switch (kind) {
    case LayerKind::Conv2d:
        require_rank3(in, "conv2d");
        in_ch = in[0];
        weight = DenseTensor::zeros(Shape({out_ch, in_ch, kernel, kernel}));
        bias = DenseTensor::zeros(Shape({out_ch}));
        break;
    case LayerKind::ConvTranspose2d:
        require_rank3(in, "conv_transpose2d");
        in_ch = in[0];
        weight = DenseTensor::zeros(Shape({in_ch, out_ch, kernel, kernel}));
        bias = DenseTensor::zeros(Shape({out_ch}));
        break;
    case LayerKind::BatchNorm: {
        require_rank3(in, "batchnorm");
        const Shape per_ch({in[0]});
        bn_scale = DenseTensor::full(per_ch, 1.0f);
        bn_shift = DenseTensor::zeros(per_ch);
        bn_mean = DenseTensor::zeros(per_ch);
        bn_var = DenseTensor::full(per_ch, 1.0f);
        break;
    }
    case LayerKind::Linear:
        if (in.rank() != 1)
            throw DomainError("linear: expected rank-1 input, got " + in.to_string());
        in_features = in[0];
        weight = DenseTensor::zeros(Shape({out_features, in_features}));
        bias = DenseTensor::zeros(Shape({out_features}));
        break;
    case LayerKind::Lif:
        lif.validate();
        break;
    default:
        break;
    }
    return out_shape(in);
}

bool LayerSpec::has_weights() const {
    switch (kind) {
    case LayerKind::Conv2d:
    case LayerKind::ConvTranspose2d:
    case LayerKind::Linear:
    case LayerKind::BatchNorm:
        return true;
    default:
        return false;
    }
}

uint64_t LayerSpec::flops(const Shape &in) const {
    const Shape out = out_shape(in);
    switch (kind) {
    case LayerKind::Conv2d:
        return 2ULL * kernel * kernel * in[0] * out_ch * out[1] * out[2];
    case LayerKind::ConvTranspose2d:
        return 2ULL * kernel * kernel * in[0] * out_ch * in[1] * in[2];
    case LayerKind::Linear:
        return 2ULL * in[0] * out_features;
    case LayerKind::BatchNorm:
        return 2ULL * out.elements(); // scale + shift per element
    case LayerKind::AvgPool:
        return out.elements() * window * window;
    case LayerKind::ResidualAdd:
        return out.elements();
    case LayerKind::Flatten:
    case LayerKind::Lif:
        return 0; // no synaptic arithmetic
    }
    return 0;
}

Activation layer_forward(const LayerSpec &layer, const Activation &input,
                         LifState *state, const Activation *residual_source) {
    const Shape &in_shape = activation_shape(input);
    switch (layer.kind) {
    case LayerKind::Conv2d: {
        const DenseTensor x = to_dense(input);
        const Shape out = layer.out_shape(in_shape);
        kernels::Conv2dDims d{in_shape[0], in_shape[1], in_shape[2],
                              layer.out_ch,  out[1],      out[2],
                              layer.kernel,  layer.stride, layer.padding};
        DenseTensor y = DenseTensor::zeros(out);
        kernels::conv2d(d, x.data, layer.weight.data, layer.bias.data, y.data);
        y.check_finite("conv2d");
        return y;
    }
    case LayerKind::ConvTranspose2d: {
        const DenseTensor x = to_dense(input);
        const Shape out = layer.out_shape(in_shape);
        kernels::Conv2dDims d{in_shape[0], in_shape[1], in_shape[2],
                              layer.out_ch,  out[1],      out[2],
                              layer.kernel,  layer.stride, layer.padding};
        DenseTensor y = DenseTensor::zeros(out);
        kernels::conv_transpose2d(d, x.data, layer.weight.data, layer.bias.data,
                                  y.data);
        y.check_finite("conv_transpose2d");
        return y;
    }
    case LayerKind::BatchNorm: {
        const DenseTensor x = to_dense(input);
        DenseTensor y = DenseTensor::zeros(in_shape);
        kernels::batchnorm(in_shape[0], in_shape[1] * in_shape[2], x.data,
                           layer.bn_scale.data, layer.bn_shift.data,
                           layer.bn_mean.data, layer.bn_var.data, LayerSpec::kBnEps,
                           y.data);
        y.check_finite("batchnorm");
        return y;
    }
    case LayerKind::Linear: {
        const DenseTensor x = to_dense(input);
        DenseTensor y = DenseTensor::zeros(Shape({layer.out_features}));
        kernels::linear(in_shape[0], layer.out_features, x.data, layer.weight.data,
                        layer.bias.data, y.data);
        y.check_finite("linear");
        return y;
    }
    case LayerKind::AvgPool: {
        const DenseTensor x = to_dense(input);
        DenseTensor y = DenseTensor::zeros(layer.out_shape(in_shape));
        kernels::avgpool(in_shape[0], in_shape[1], in_shape[2], layer.window,
                         x.data, y.data);
        return y;
    }
    case LayerKind::Flatten: {
        DenseTensor x = to_dense(input);
        return DenseTensor(Shape({static_cast<uint32_t>(in_shape.elements())}),
                           std::move(x.data));
    }
    case LayerKind::Lif: {
        if (!state)
            throw DomainError("layer_forward: Lif layer requires a LifState");
        return lif_step(*state, to_dense(input));
    }
    case LayerKind::ResidualAdd: {
        if (!residual_source)
            throw DomainError("layer_forward: ResidualAdd requires a source activation");
        const Shape &src_shape = activation_shape(*residual_source);
        if (!(src_shape == in_shape))
            throw DomainError("residual_add: shape mismatch " + in_shape.to_string() +
                              " vs " + src_shape.to_string());
        DenseTensor y = to_dense(input);
        const DenseTensor s = to_dense(*residual_source);
        for (size_t i = 0; i < y.data.size(); ++i)
            y.data[i] += s.data[i];
        return y;
    }
    }
    throw DomainError("layer_forward: unknown layer kind");
}

} // namespace neucodex
