#pragma once

#include "neucodex/tensor.hpp"

namespace neucodex {

// Membrane time constant, threshold, reset. SpikingJelly defaults.
struct LifParams {
    float tau = 2.0f;
    float v_th = 1.0f;
    float v_reset = 0.0f;

    void validate() const {
        if (!(tau >= 1.0f))
            throw DomainError("LifParams: tau must be >= 1");
        if (!(v_th > v_reset))
            throw DomainError("LifParams: v_th must be > v_reset");
    }
};

// Per-neuron membrane potentials for one LIF layer. Mutable per session;
// never shared across concurrent sessions.
struct LifState {
    DenseTensor v;
    LifParams params;

    LifState() = default;
    LifState(const Shape &shape, LifParams p);

    void reset(); // all potentials back to v_reset
};

// One membrane update:
//   h = v + (x - (v - v_reset)) / tau
//   spike = (h >= v_th), theta(0) = 1
//   v' = v_reset where spiked, else h
// Returns the spike tensor and mutates state.
SpikeTensor lif_step(LifState &state, const DenseTensor &x);

} // namespace neucodex
