#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neucodex/layers.hpp"

namespace neucodex {

// Layer sequence partitioned into an edge part [0, split) and a cloud part
// [split, end) by named split points. Weights are immutable once loaded and
// safe to share; per-session mutable state lives in NetStates.
struct NetworkGraph {
    std::string name;
    Shape input_shape;
    uint32_t num_classes = 0;
    std::vector<LayerSpec> layers;
    // Split name -> boundary index: the edge runs layers [0, index).
    std::map<std::string, size_t> split_points;

    // boundary_shapes[i] = shape entering layer i; boundary_shapes[n] = output.
    std::vector<Shape> boundary_shapes;

    // Resolves shapes, allocates weights, checks all invariants.
    void finalize();

    size_t split_index(const std::string &name) const; // throws ConfigError
    const Shape &split_shape(size_t boundary) const;

    // Canonical one-line-per-layer description; hashed into the config digest.
    std::string describe() const;

    uint64_t layer_flops(size_t i) const;
    uint64_t total_params() const;
};

// Per-session LIF states, one slot per layer (engaged only for Lif layers).
struct NetStates {
    std::vector<std::optional<LifState>> lif;

    void reset();
};

NetStates make_states(const NetworkGraph &net);
// States for only the layer range [from, to); other slots stay empty.
NetStates make_states(const NetworkGraph &net, size_t from, size_t to);

// Per-layer mean input activity accumulated across timesteps, for the
// energy model. Indexed by absolute layer index.
struct ActivityTrace {
    std::vector<double> input_activity_sum;
    uint32_t timesteps = 0;

    void ensure(size_t layers);
    double mean_rate(size_t layer) const;
};

// Composes layer_forward over the half-open layer range, carrying membrane
// state across calls. Running [0,s) then [s,end) with the same states equals
// one [0,end) pass. An empty range returns the input unchanged.
Activation forward_timestep(const NetworkGraph &net, NetStates &states,
                            const Activation &input, size_t from, size_t to,
                            ActivityTrace *trace = nullptr);

// Every membrane potential back to v_reset (per-sample reset).
void reset_state(NetStates &states);

// Built-in desk-scale topologies. in_ch is 3 for static images, 2 for
// polarity event frames.
NetworkGraph make_resnet_mini(uint32_t in_ch, uint32_t num_classes);
NetworkGraph make_vgg_mini(uint32_t in_ch, uint32_t num_classes);

// Declarative topology file (JSON; see README for the schema).
NetworkGraph load_topology_file(const std::string &path);

} // namespace neucodex
