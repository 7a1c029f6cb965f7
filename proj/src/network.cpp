#include "neucodex/network.hpp"

#include <sstream>

namespace neucodex {

void NetworkGraph::finalize() {
    if (layers.empty())
        throw DomainError("NetworkGraph: no layers");
    boundary_shapes.clear();
    boundary_shapes.reserve(layers.size() + 1);
    boundary_shapes.push_back(input_shape);
    for (size_t i = 0; i < layers.size(); ++i) {
        LayerSpec &l = layers[i];
        if (l.kind == LayerKind::ResidualAdd) {
            if (l.residual_from < 0 || static_cast<size_t>(l.residual_from) >= i)
                throw DomainError("NetworkGraph: residual source must precede layer " +
                                  std::to_string(i));
            const Shape &src = boundary_shapes[l.residual_from + 1];
            if (!(src == boundary_shapes[i]))
                throw DomainError("NetworkGraph: residual shape mismatch at layer " +
                                  std::to_string(i));
        }
        boundary_shapes.push_back(l.finalize(boundary_shapes.back()));
    }

    const Shape &out = boundary_shapes.back();
    if (out.rank() != 1 || out[0] != num_classes)
        throw DomainError("NetworkGraph: output shape " + out.to_string() +
                          " does not match num_classes " + std::to_string(num_classes));

    size_t prev = 0;
    for (const auto &[name, idx] : split_points) {
        if (idx == 0 || idx > layers.size())
            throw DomainError("NetworkGraph: split " + name + " out of range");
        if (layers[idx - 1].kind != LayerKind::Lif)
            throw DomainError("NetworkGraph: split " + name +
                              " is not immediately after a Lif layer");
        (void)prev;
        prev = idx;
    }
    // std::map iterates name-sorted; check strict increase over sorted indices.
    std::vector<size_t> idxs;
    for (const auto &kv : split_points)
        idxs.push_back(kv.second);
    std::sort(idxs.begin(), idxs.end());
    for (size_t i = 1; i < idxs.size(); ++i)
        if (idxs[i] == idxs[i - 1])
            throw DomainError("NetworkGraph: duplicate split index");

    // A residual edge must not span a split boundary, except for a source
    // that is exactly the split activation (which both sides hold).
    for (size_t j = 0; j < layers.size(); ++j) {
        if (layers[j].kind != LayerKind::ResidualAdd)
            continue;
        const size_t s = static_cast<size_t>(layers[j].residual_from);
        for (const auto &[name, p] : split_points) {
            if (p > s + 1 && p <= j)
                throw DomainError("NetworkGraph: split " + name +
                                  " crosses residual edge at layer " + std::to_string(j));
        }
    }
}

size_t NetworkGraph::split_index(const std::string &sp) const {
    auto it = split_points.find(sp);
    if (it == split_points.end())
        throw ConfigError("unknown split point '" + sp + "' in topology " + name);
    return it->second;
}

const Shape &NetworkGraph::split_shape(size_t boundary) const {
    return boundary_shapes.at(boundary);
}

std::string NetworkGraph::describe() const {
    std::ostringstream os;
    os << "topology " << name << " input " << input_shape.to_string() << " classes "
       << num_classes << "\n";
    for (size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec &l = layers[i];
        os << i << ' ' << layer_kind_name(l.kind);
        switch (l.kind) {
        case LayerKind::Conv2d:
        case LayerKind::ConvTranspose2d:
            os << " oc=" << l.out_ch << " k=" << l.kernel << " s=" << l.stride
               << " p=" << l.padding;
            break;
        case LayerKind::Linear:
            os << " out=" << l.out_features;
            break;
        case LayerKind::AvgPool:
            os << " w=" << l.window;
            break;
        case LayerKind::Lif:
            os << " tau=" << l.lif.tau << " vth=" << l.lif.v_th << " vr="
               << l.lif.v_reset;
            break;
        case LayerKind::ResidualAdd:
            os << " from=" << l.residual_from;
            break;
        default:
            break;
        }
        os << "\n";
    }
    for (const auto &[sp, idx] : split_points)
        os << sp << '=' << idx << "\n";
    return os.str();
}

uint64_t NetworkGraph::layer_flops(size_t i) const {
    return layers.at(i).flops(boundary_shapes.at(i));
}

uint64_t NetworkGraph::total_params() const {
    uint64_t n = 0;
    for (const LayerSpec &l : layers) {
        n += l.weight.data.size() + l.bias.data.size();
        n += l.bn_scale.data.size() + l.bn_shift.data.size() +
             l.bn_mean.data.size() + l.bn_var.data.size();
    }
    return n;
}

void NetStates::reset() {
    for (auto &s : lif)
        if (s)
            s->reset();
}

void reset_state(NetStates &states) { states.reset(); }

NetStates make_states(const NetworkGraph &net) {
    return make_states(net, 0, net.layers.size());
}

NetStates make_states(const NetworkGraph &net, size_t from, size_t to) {
    NetStates st;
    st.lif.resize(net.layers.size());
    for (size_t i = from; i < to && i < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::Lif)
            st.lif[i].emplace(net.boundary_shapes[i], net.layers[i].lif);
    }
    return st;
}

void ActivityTrace::ensure(size_t layers) {
    if (input_activity_sum.size() < layers)
        input_activity_sum.resize(layers, 0.0);
}

double ActivityTrace::mean_rate(size_t layer) const {
    if (timesteps == 0 || layer >= input_activity_sum.size())
        return 0.0;
    return input_activity_sum[layer] / timesteps;
}

Activation forward_timestep(const NetworkGraph &net, NetStates &states,
                            const Activation &input, size_t from, size_t to,
                            ActivityTrace *trace) {
    if (from > to || to > net.layers.size())
        throw DomainError("forward_timestep: invalid layer range [" +
                          std::to_string(from) + "," + std::to_string(to) + ")");
    if (from == to)
        return input;
    if (!(activation_shape(input) == net.boundary_shapes[from]))
        throw DomainError("forward_timestep: input shape " +
                          activation_shape(input).to_string() + " does not match " +
                          net.boundary_shapes[from].to_string() + " at layer " +
                          std::to_string(from));
    if (trace)
        trace->ensure(net.layers.size());

    // Cache only outputs some later ResidualAdd in [from,to) will reference.
    std::vector<bool> keep(net.layers.size(), false);
    for (size_t j = from; j < to; ++j)
        if (net.layers[j].kind == LayerKind::ResidualAdd &&
            static_cast<size_t>(net.layers[j].residual_from) >= from)
            keep[net.layers[j].residual_from] = true;

    std::vector<std::optional<Activation>> cache(net.layers.size());
    Activation cur = input;
    for (size_t i = from; i < to; ++i) {
        const LayerSpec &l = net.layers[i];
        if (trace)
            trace->input_activity_sum[i] += activation_activity(cur);

        const Activation *residual = nullptr;
        if (l.kind == LayerKind::ResidualAdd) {
            const size_t src = static_cast<size_t>(l.residual_from);
            if (src + 1 == from) {
                residual = &input; // the range input is the split activation
            } else if (src >= from && cache[src]) {
                residual = &*cache[src];
            } else {
                throw DomainError("forward_timestep: residual source " +
                                  std::to_string(src) + " not available in range");
            }
        }

        LifState *state = nullptr;
        if (l.kind == LayerKind::Lif) {
            if (!states.lif[i])
                throw DomainError("forward_timestep: missing LifState for layer " +
                                  std::to_string(i));
            state = &*states.lif[i];
        }

        cur = layer_forward(l, cur, state, residual);
        if (keep[i])
            cache[i] = cur;
    }
    if (trace)
        trace->timesteps += 1;
    return cur;
}

} // namespace neucodex
