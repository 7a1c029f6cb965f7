#include "neucodex/lif.hpp"

#include "neucodex/kernels.hpp"

namespace neucodex {

LifState::LifState(const Shape &shape, LifParams p) : params(p) {
    params.validate();
    v = DenseTensor::full(shape, params.v_reset);
}

void LifState::reset() {
    std::fill(v.data.begin(), v.data.end(), params.v_reset);
}

SpikeTensor lif_step(LifState &state, const DenseTensor &x) {
    if (!(x.shape == state.v.shape))
        throw DomainError("lif_step: input shape " + x.shape.to_string() +
                          " does not match state shape " + state.v.shape.to_string());
    x.check_finite("lif_step");
    const size_t n = x.data.size();
    std::vector<uint8_t> spikes(n);
    kernels::lif_update(n, x.data, state.v.data, state.params.tau,
                        state.params.v_th, state.params.v_reset, spikes);
    return SpikeTensor::from_values(x.shape, spikes);
}

} // namespace neucodex
