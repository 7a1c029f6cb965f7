#include "neucodex/kernels.hpp"

#include <atomic>
#include <cmath>

#include "neucodex/errors.hpp"

namespace neucodex::kernels {

namespace {
std::atomic<Exec> g_default_exec{Exec::Parallel};
}

Exec default_exec() { return g_default_exec.load(std::memory_order_relaxed); }
void set_default_exec(Exec e) { g_default_exec.store(e, std::memory_order_relaxed); }

namespace ref {

void conv2d(const Conv2dDims &d, const float *in, const float *weight,
            const float *bias, float *out) {
    for (uint32_t oc = 0; oc < d.out_ch; ++oc) {
        for (uint32_t oy = 0; oy < d.out_h; ++oy) {
            for (uint32_t ox = 0; ox < d.out_w; ++ox) {
                float acc = bias ? bias[oc] : 0.0f;
                for (uint32_t ic = 0; ic < d.in_ch; ++ic) {
                    for (uint32_t ky = 0; ky < d.kernel; ++ky) {
                        const int64_t iy = static_cast<int64_t>(oy) * d.stride + ky -
                                           d.padding;
                        if (iy < 0 || iy >= d.in_h)
                            continue;
                        for (uint32_t kx = 0; kx < d.kernel; ++kx) {
                            const int64_t ix = static_cast<int64_t>(ox) * d.stride +
                                               kx - d.padding;
                            if (ix < 0 || ix >= d.in_w)
                                continue;
                            acc += in[(static_cast<size_t>(ic) * d.in_h + iy) * d.in_w + ix] *
                                   weight[((static_cast<size_t>(oc) * d.in_ch + ic) * d.kernel + ky) *
                                              d.kernel + kx];
                        }
                    }
                }
                out[(static_cast<size_t>(oc) * d.out_h + oy) * d.out_w + ox] = acc;
            }
        }
    }
}

void conv_transpose2d(const Conv2dDims &d, const float *in, const float *weight,
                      const float *bias, float *out) {
    // Gather form: for each output position, fold over the input positions
    // that scatter onto it, i.e. iy = (oy + padding - ky) / stride when exact.
    for (uint32_t oc = 0; oc < d.out_ch; ++oc) {
        for (uint32_t oy = 0; oy < d.out_h; ++oy) {
            for (uint32_t ox = 0; ox < d.out_w; ++ox) {
                float acc = bias ? bias[oc] : 0.0f;
                for (uint32_t ic = 0; ic < d.in_ch; ++ic) {
                    for (uint32_t ky = 0; ky < d.kernel; ++ky) {
                        const int64_t ny = static_cast<int64_t>(oy) + d.padding - ky;
                        if (ny < 0 || ny % d.stride != 0)
                            continue;
                        const int64_t iy = ny / d.stride;
                        if (iy >= d.in_h)
                            continue;
                        for (uint32_t kx = 0; kx < d.kernel; ++kx) {
                            const int64_t nx = static_cast<int64_t>(ox) + d.padding - kx;
                            if (nx < 0 || nx % d.stride != 0)
                                continue;
                            const int64_t ix = nx / d.stride;
                            if (ix >= d.in_w)
                                continue;
                            acc += in[(static_cast<size_t>(ic) * d.in_h + iy) * d.in_w + ix] *
                                   weight[((static_cast<size_t>(ic) * d.out_ch + oc) * d.kernel + ky) *
                                              d.kernel + kx];
                        }
                    }
                }
                out[(static_cast<size_t>(oc) * d.out_h + oy) * d.out_w + ox] = acc;
            }
        }
    }
}

void batchnorm(uint32_t channels, uint32_t spatial, const float *in,
               const float *scale, const float *shift, const float *mean,
               const float *var, float eps, float *out) {
    for (uint32_t c = 0; c < channels; ++c) {
        const float a = scale[c] / std::sqrt(var[c] + eps);
        const float b = shift[c] - mean[c] * a;
        const size_t base = static_cast<size_t>(c) * spatial;
        for (uint32_t i = 0; i < spatial; ++i)
            out[base + i] = a * in[base + i] + b;
    }
}

void linear(uint32_t n_in, uint32_t n_out, const float *in, const float *weight,
            const float *bias, float *out) {
    for (uint32_t o = 0; o < n_out; ++o) {
        float acc = bias ? bias[o] : 0.0f;
        const float *w = weight + static_cast<size_t>(o) * n_in;
        for (uint32_t i = 0; i < n_in; ++i)
            acc += w[i] * in[i];
        out[o] = acc;
    }
}

void avgpool(uint32_t channels, uint32_t in_h, uint32_t in_w, uint32_t window,
             const float *in, float *out) {
    const uint32_t out_h = in_h / window;
    const uint32_t out_w = in_w / window;
    const float inv = 1.0f / static_cast<float>(window * window);
    for (uint32_t c = 0; c < channels; ++c) {
        for (uint32_t oy = 0; oy < out_h; ++oy) {
            for (uint32_t ox = 0; ox < out_w; ++ox) {
                float acc = 0.0f;
                for (uint32_t ky = 0; ky < window; ++ky)
                    for (uint32_t kx = 0; kx < window; ++kx)
                        acc += in[(static_cast<size_t>(c) * in_h + oy * window + ky) * in_w +
                                  ox * window + kx];
                out[(static_cast<size_t>(c) * out_h + oy) * out_w + ox] = acc * inv;
            }
        }
    }
}

void lif_update(size_t n, const float *x, float *v, float tau, float v_th,
                float v_reset, uint8_t *spikes_out) {
    const float inv_tau = 1.0f / tau;
    for (size_t i = 0; i < n; ++i) {
        const float h = v[i] + (x[i] - (v[i] - v_reset)) * inv_tau;
        const bool spike = h >= v_th;
        spikes_out[i] = spike ? 1 : 0;
        v[i] = spike ? v_reset : h;
    }
}

} // namespace ref

namespace {

void check_span(size_t got, size_t want, const char *what) {
    if (got != want)
        throw DomainError(std::string(what) + ": span length mismatch");
}

} // namespace

void conv2d(const Conv2dDims &d, std::span<const float> in,
            std::span<const float> weight, std::span<const float> bias,
            std::span<float> out, Exec e) {
    check_span(in.size(), static_cast<size_t>(d.in_ch) * d.in_h * d.in_w, "conv2d in");
    check_span(weight.size(),
               static_cast<size_t>(d.out_ch) * d.in_ch * d.kernel * d.kernel,
               "conv2d weight");
    check_span(out.size(), static_cast<size_t>(d.out_ch) * d.out_h * d.out_w,
               "conv2d out");
    const float *b = bias.empty() ? nullptr : bias.data();
    if (e == Exec::Reference)
        ref::conv2d(d, in.data(), weight.data(), b, out.data());
    else
        par::conv2d(d, in.data(), weight.data(), b, out.data());
}

void conv_transpose2d(const Conv2dDims &d, std::span<const float> in,
                      std::span<const float> weight, std::span<const float> bias,
                      std::span<float> out, Exec e) {
    check_span(in.size(), static_cast<size_t>(d.in_ch) * d.in_h * d.in_w,
               "conv_transpose2d in");
    check_span(weight.size(),
               static_cast<size_t>(d.in_ch) * d.out_ch * d.kernel * d.kernel,
               "conv_transpose2d weight");
    check_span(out.size(), static_cast<size_t>(d.out_ch) * d.out_h * d.out_w,
               "conv_transpose2d out");
    const float *b = bias.empty() ? nullptr : bias.data();
    if (e == Exec::Reference)
        ref::conv_transpose2d(d, in.data(), weight.data(), b, out.data());
    else
        par::conv_transpose2d(d, in.data(), weight.data(), b, out.data());
}

void batchnorm(uint32_t channels, uint32_t spatial, std::span<const float> in,
               std::span<const float> scale, std::span<const float> shift,
               std::span<const float> mean, std::span<const float> var,
               float eps, std::span<float> out, Exec e) {
    check_span(in.size(), static_cast<size_t>(channels) * spatial, "batchnorm in");
    check_span(scale.size(), channels, "batchnorm scale");
    check_span(shift.size(), channels, "batchnorm shift");
    check_span(mean.size(), channels, "batchnorm mean");
    check_span(var.size(), channels, "batchnorm var");
    check_span(out.size(), in.size(), "batchnorm out");
    if (e == Exec::Reference)
        ref::batchnorm(channels, spatial, in.data(), scale.data(), shift.data(),
                       mean.data(), var.data(), eps, out.data());
    else
        par::batchnorm(channels, spatial, in.data(), scale.data(), shift.data(),
                       mean.data(), var.data(), eps, out.data());
}

void linear(uint32_t n_in, uint32_t n_out, std::span<const float> in,
            std::span<const float> weight, std::span<const float> bias,
            std::span<float> out, Exec e) {
    check_span(in.size(), n_in, "linear in");
    check_span(weight.size(), static_cast<size_t>(n_in) * n_out, "linear weight");
    check_span(out.size(), n_out, "linear out");
    const float *b = bias.empty() ? nullptr : bias.data();
    if (e == Exec::Reference)
        ref::linear(n_in, n_out, in.data(), weight.data(), b, out.data());
    else
        par::linear(n_in, n_out, in.data(), weight.data(), b, out.data());
}

void avgpool(uint32_t channels, uint32_t in_h, uint32_t in_w, uint32_t window,
             std::span<const float> in, std::span<float> out, Exec e) {
    if (window == 0 || in_h % window != 0 || in_w % window != 0)
        throw DomainError("avgpool: window must evenly divide spatial extent");
    check_span(in.size(), static_cast<size_t>(channels) * in_h * in_w, "avgpool in");
    check_span(out.size(),
               static_cast<size_t>(channels) * (in_h / window) * (in_w / window),
               "avgpool out");
    if (e == Exec::Reference)
        ref::avgpool(channels, in_h, in_w, window, in.data(), out.data());
    else
        par::avgpool(channels, in_h, in_w, window, in.data(), out.data());
}

void lif_update(size_t n, std::span<const float> x, std::span<float> v,
                float tau, float v_th, float v_reset,
                std::span<uint8_t> spikes_out, Exec e) {
    check_span(x.size(), n, "lif_update x");
    check_span(v.size(), n, "lif_update v");
    check_span(spikes_out.size(), n, "lif_update spikes");
    if (e == Exec::Reference)
        ref::lif_update(n, x.data(), v.data(), tau, v_th, v_reset, spikes_out.data());
    else
        par::lif_update(n, x.data(), v.data(), tau, v_th, v_reset, spikes_out.data());
}

} // namespace neucodex::kernels
