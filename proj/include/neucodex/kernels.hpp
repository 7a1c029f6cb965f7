#pragma once

#include <cstdint>
#include <span>

namespace neucodex::kernels {

// Every kernel exists twice: a plain nested-loop reference and an
// OpenMP-parallel version. Both parallelize only across output elements,
// with an identical per-element accumulation order, so results are
// bit-identical regardless of Exec and thread count.
enum class Exec { Reference, Parallel };

Exec default_exec();
void set_default_exec(Exec e);

struct Conv2dDims {
    uint32_t in_ch, in_h, in_w;
    uint32_t out_ch, out_h, out_w;
    uint32_t kernel, stride, padding;
};

// weight layout (out_ch, in_ch, k, k); zero padding.
void conv2d(const Conv2dDims &d, std::span<const float> in,
            std::span<const float> weight, std::span<const float> bias,
            std::span<float> out, Exec e = default_exec());

// Transposed convolution, gather form over output positions.
// weight layout (in_ch, out_ch, k, k); out_h = (in_h-1)*stride - 2*padding + kernel.
void conv_transpose2d(const Conv2dDims &d, std::span<const float> in,
                      std::span<const float> weight, std::span<const float> bias,
                      std::span<float> out, Exec e = default_exec());

// Inference-mode affine normalization over (C, spatial) with per-channel
// statistics: y = scale*(x-mean)/sqrt(var+eps) + shift.
void batchnorm(uint32_t channels, uint32_t spatial, std::span<const float> in,
               std::span<const float> scale, std::span<const float> shift,
               std::span<const float> mean, std::span<const float> var,
               float eps, std::span<float> out, Exec e = default_exec());

// weight layout (n_out, n_in).
void linear(uint32_t n_in, uint32_t n_out, std::span<const float> in,
            std::span<const float> weight, std::span<const float> bias,
            std::span<float> out, Exec e = default_exec());

// Non-overlapping window average pool; stride == window.
void avgpool(uint32_t channels, uint32_t in_h, uint32_t in_w, uint32_t window,
             std::span<const float> in, std::span<float> out,
             Exec e = default_exec());

// One LIF membrane update over n neurons. v is mutated in place;
// spikes_out receives 0/1 per neuron.
//   h = v + (x - (v - v_reset)) / tau
//   spike = (h >= v_th)              (Heaviside with theta(0) = 1)
//   v' = spike ? v_reset : h
void lif_update(size_t n, std::span<const float> x, std::span<float> v,
                float tau, float v_th, float v_reset,
                std::span<uint8_t> spikes_out, Exec e = default_exec());

namespace ref {
void conv2d(const Conv2dDims &d, const float *in, const float *weight,
            const float *bias, float *out);
void conv_transpose2d(const Conv2dDims &d, const float *in, const float *weight,
                      const float *bias, float *out);
void batchnorm(uint32_t channels, uint32_t spatial, const float *in,
               const float *scale, const float *shift, const float *mean,
               const float *var, float eps, float *out);
void linear(uint32_t n_in, uint32_t n_out, const float *in, const float *weight,
            const float *bias, float *out);
void avgpool(uint32_t channels, uint32_t in_h, uint32_t in_w, uint32_t window,
             const float *in, float *out);
void lif_update(size_t n, const float *x, float *v, float tau, float v_th,
                float v_reset, uint8_t *spikes_out);
} // namespace ref

namespace par {
void conv2d(const Conv2dDims &d, const float *in, const float *weight,
            const float *bias, float *out);
void conv_transpose2d(const Conv2dDims &d, const float *in, const float *weight,
                      const float *bias, float *out);
void batchnorm(uint32_t channels, uint32_t spatial, const float *in,
               const float *scale, const float *shift, const float *mean,
               const float *var, float eps, float *out);
void linear(uint32_t n_in, uint32_t n_out, const float *in, const float *weight,
            const float *bias, float *out);
void avgpool(uint32_t channels, uint32_t in_h, uint32_t in_w, uint32_t window,
             const float *in, float *out);
void lif_update(size_t n, const float *x, float *v, float tau, float v_th,
                float v_reset, uint8_t *spikes_out);
} // namespace par

} // namespace neucodex::kernels
