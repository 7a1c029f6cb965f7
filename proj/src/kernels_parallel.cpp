#include "neucodex/kernels.hpp"

#include <cmath>
#include <cstdint>

// OpenMP variants. Work is split across output elements only; each element's
// accumulation runs in a single thread with the same loop order as the
// reference kernels, so the results match the reference bit-for-bit.

namespace neucodex::kernels::par {

void conv2d(const Conv2dDims &d, const float *in, const float *weight,
            const float *bias, float *out) {
    const int64_t total = static_cast<int64_t>(d.out_ch) * d.out_h * d.out_w;
#pragma omp parallel for schedule(static)
    for (int64_t idx = 0; idx < total; ++idx) {
        const uint32_t oc = static_cast<uint32_t>(idx / (d.out_h * d.out_w));
        const uint32_t oy = static_cast<uint32_t>((idx / d.out_w) % d.out_h);
        const uint32_t ox = static_cast<uint32_t>(idx % d.out_w);
        float acc = bias ? bias[oc] : 0.0f;
        for (uint32_t ic = 0; ic < d.in_ch; ++ic) {
            for (uint32_t ky = 0; ky < d.kernel; ++ky) {
                const int64_t iy = static_cast<int64_t>(oy) * d.stride + ky - d.padding;
                if (iy < 0 || iy >= d.in_h)
                    continue;
                for (uint32_t kx = 0; kx < d.kernel; ++kx) {
                    const int64_t ix = static_cast<int64_t>(ox) * d.stride + kx - d.padding;
                    if (ix < 0 || ix >= d.in_w)
                        continue;
                    acc += in[(static_cast<size_t>(ic) * d.in_h + iy) * d.in_w + ix] *
                           weight[((static_cast<size_t>(oc) * d.in_ch + ic) * d.kernel + ky) *
                                      d.kernel + kx];
                }
            }
        }
        out[idx] = acc;
    }
}

void conv_transpose2d(const Conv2dDims &d, const float *in, const float *weight,
                      const float *bias, float *out) {
    const int64_t total = static_cast<int64_t>(d.out_ch) * d.out_h * d.out_w;
#pragma omp parallel for schedule(static)
    for (int64_t idx = 0; idx < total; ++idx) {
        const uint32_t oc = static_cast<uint32_t>(idx / (d.out_h * d.out_w));
        const uint32_t oy = static_cast<uint32_t>((idx / d.out_w) % d.out_h);
        const uint32_t ox = static_cast<uint32_t>(idx % d.out_w);
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
        out[idx] = acc;
    }
}

void batchnorm(uint32_t channels, uint32_t spatial, const float *in,
               const float *scale, const float *shift, const float *mean,
               const float *var, float eps, float *out) {
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < static_cast<int64_t>(channels); ++c) {
        const float a = scale[c] / std::sqrt(var[c] + eps);
        const float b = shift[c] - mean[c] * a;
        const size_t base = static_cast<size_t>(c) * spatial;
        for (uint32_t i = 0; i < spatial; ++i)
            out[base + i] = a * in[base + i] + b;
    }
}

void linear(uint32_t n_in, uint32_t n_out, const float *in, const float *weight,
            const float *bias, float *out) {
#pragma omp parallel for schedule(static)
    for (int64_t o = 0; o < static_cast<int64_t>(n_out); ++o) {
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
    const int64_t total = static_cast<int64_t>(channels) * out_h * out_w;
#pragma omp parallel for schedule(static)
    for (int64_t idx = 0; idx < total; ++idx) {
        const uint32_t c = static_cast<uint32_t>(idx / (out_h * out_w));
        const uint32_t oy = static_cast<uint32_t>((idx / out_w) % out_h);
        const uint32_t ox = static_cast<uint32_t>(idx % out_w);
        float acc = 0.0f;
        for (uint32_t ky = 0; ky < window; ++ky)
            for (uint32_t kx = 0; kx < window; ++kx)
                acc += in[(static_cast<size_t>(c) * in_h + oy * window + ky) * in_w +
                          ox * window + kx];
        out[idx] = acc * inv;
    }
}

void lif_update(size_t n, const float *x, float *v, float tau, float v_th,
                float v_reset, uint8_t *spikes_out) {
    const float inv_tau = 1.0f / tau;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
        const float h = v[i] + (x[i] - (v[i] - v_reset)) * inv_tau;
        const bool spike = h >= v_th;
        spikes_out[i] = spike ? 1 : 0;
        v[i] = spike ? v_reset : h;
    }
}

} // namespace neucodex::kernels::par
