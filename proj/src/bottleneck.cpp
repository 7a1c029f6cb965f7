#include "neucodex/bottleneck.hpp"

#include <sstream>

namespace neucodex {

Shape BottleneckConfig::code_shape() const {
    const int64_t padded_h = static_cast<int64_t>(in_shape[1]) + 2 * padding;
    const int64_t padded_w = static_cast<int64_t>(in_shape[2]) + 2 * padding;
    if (padded_h < kernel || padded_w < kernel)
        throw DomainError("BottleneckConfig: kernel larger than padded input");
    return Shape({code_channels,
                  static_cast<uint32_t>((padded_h - kernel) / stride + 1),
                  static_cast<uint32_t>((padded_w - kernel) / stride + 1)});
}

void BottleneckConfig::validate() const {
    if (in_shape.rank() != 3)
        throw DomainError("BottleneckConfig: in_shape must be (C,H,W)");
    lif.validate();
    const Shape code = code_shape();
    if (code.elements() >= in_shape.elements())
        throw DomainError("BottleneckConfig: code " + code.to_string() +
                          " is not smaller than input " + in_shape.to_string());
    // The transposed conv with the same kernel/stride/padding must restore
    // the input spatial extent exactly.
    const int64_t rh = static_cast<int64_t>(code[1] - 1) * stride -
                       2 * static_cast<int64_t>(padding) + kernel;
    const int64_t rw = static_cast<int64_t>(code[2] - 1) * stride -
                       2 * static_cast<int64_t>(padding) + kernel;
    if (rh != in_shape[1] || rw != in_shape[2])
        throw DomainError("BottleneckConfig: decoder does not restore input extent (" +
                          std::to_string(rh) + "x" + std::to_string(rw) + " vs " +
                          in_shape.to_string() + ")");
}

std::string BottleneckConfig::describe() const {
    std::ostringstream os;
    os << "bottleneck in=" << in_shape.to_string() << " code=" << code_shape().to_string()
       << " k=" << kernel << " s=" << stride << " p=" << padding;
    return os.str();
}

BottleneckConfig default_bottleneck(const Shape &split_shape, uint32_t code_channels) {
    if (split_shape.rank() != 3)
        throw DomainError("default_bottleneck: split shape must be (C,H,W)");
    BottleneckConfig cfg;
    cfg.in_shape = split_shape;
    cfg.code_channels = code_channels;
    const uint32_t h = split_shape[1];
    uint32_t k;
    if (h <= 4)
        k = h; // collapse to 1x1
    else if (h >= 32)
        k = 8;
    else
        k = 4;
    cfg.kernel = k;
    cfg.stride = k;
    cfg.padding = 0;
    cfg.validate();
    return cfg;
}

Bottleneck::Bottleneck(BottleneckConfig c) : cfg(std::move(c)) {
    cfg.validate();
    const Shape code = cfg.code_shape();

    enc_conv = LayerSpec::conv2d(cfg.code_channels, cfg.kernel, cfg.stride, cfg.padding);
    enc_conv.finalize(cfg.in_shape);
    enc_bn = LayerSpec::batchnorm();
    enc_bn.finalize(code);

    dec_conv = LayerSpec::conv_transpose2d(cfg.in_shape[0], cfg.kernel, cfg.stride,
                                           cfg.padding);
    dec_conv.finalize(code);
    dec_bn = LayerSpec::batchnorm();
    dec_bn.finalize(cfg.in_shape);
}

CodecStates::CodecStates(const Bottleneck &b)
    : enc(b.cfg.code_shape(), b.cfg.lif), dec(b.cfg.in_shape, b.cfg.lif) {}

void CodecStates::reset() {
    enc.reset();
    dec.reset();
}

SpikeTensor bottleneck_encode(const Bottleneck &b, CodecStates &st,
                              const SpikeTensor &x, CodecActivity *probe) {
    if (!(x.shape() == b.cfg.in_shape))
        throw DomainError("bottleneck_encode: input shape " + x.shape().to_string() +
                          " does not match " + b.cfg.in_shape.to_string());
    if (probe)
        probe->conv_in_sum += firing_rate(x);
    Activation a = layer_forward(b.enc_conv, x, nullptr, nullptr);
    if (probe) {
        probe->bn_in_sum += activation_activity(a);
        probe->steps += 1;
    }
    a = layer_forward(b.enc_bn, a, nullptr, nullptr);
    return lif_step(st.enc, std::get<DenseTensor>(a));
}

SpikeTensor bottleneck_decode(const Bottleneck &b, CodecStates &st,
                              const SpikeTensor &z) {
    if (!(z.shape() == b.cfg.code_shape()))
        throw DomainError("bottleneck_decode: code shape " + z.shape().to_string() +
                          " does not match " + b.cfg.code_shape().to_string());
    Activation a = layer_forward(b.dec_conv, z, nullptr, nullptr);
    a = layer_forward(b.dec_bn, a, nullptr, nullptr);
    return lif_step(st.dec, std::get<DenseTensor>(a));
}

uint64_t payload_bits(const Shape &shape, uint64_t timesteps_sent) {
    return shape.elements() * timesteps_sent;
}

double compression_ratio(uint64_t raw_bits, uint64_t coded_bits) {
    if (coded_bits == 0)
        throw DomainError("compression_ratio: coded bit count is zero");
    return static_cast<double>(raw_bits) / static_cast<double>(coded_bits);
}

} // namespace neucodex
