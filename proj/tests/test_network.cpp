#include <doctest.h>

#include "neucodex/encoding.hpp"
#include "neucodex/model_io.hpp"
#include "neucodex/network.hpp"
#include "neucodex/rng.hpp"

using namespace neucodex;

namespace {

NetworkGraph seeded_net(NetworkGraph net, uint64_t seed) {
    const auto entries = seeded_init(net, seed);
    apply_entries(net, nullptr, entries);
    return net;
}

SpikeTensor random_frame(const Shape &shape, uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<uint8_t> v(shape.elements());
    for (auto &b : v)
        b = rng.next_double() < 0.35 ? 1 : 0;
    return SpikeTensor::from_values(shape, v);
}

std::vector<float> run_monolithic_logits(const NetworkGraph &net, uint64_t seed,
                                         uint32_t steps) {
    NetStates st = make_states(net);
    std::vector<float> last;
    for (uint32_t t = 1; t <= steps; ++t) {
        const Activation out = forward_timestep(
            net, st, random_frame(net.input_shape, seed + t), 0, net.layers.size());
        last = std::get<DenseTensor>(out).data;
    }
    return last;
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("mini topologies are well-formed and desk-scale") {
    const NetworkGraph resnet = make_resnet_mini(3, 10);
    const NetworkGraph vgg = make_vgg_mini(3, 10);
    CHECK(resnet.total_params() < 200000);
    CHECK(vgg.total_params() < 200000);
    CHECK(resnet.split_shape(resnet.split_index("SP7")) == Shape({512, 4, 4}));
    CHECK(resnet.split_shape(resnet.split_index("SP1")) == Shape({16, 32, 32}));
    CHECK(vgg.split_points.size() == 5);
    for (const auto &[name, idx] : resnet.split_points)
        CHECK(resnet.layers[idx - 1].kind == LayerKind::Lif);
    CHECK(resnet.boundary_shapes.back() == Shape({10}));
}

TEST_CASE("graph validation catches bad structures") {
    NetworkGraph bad;
    bad.name = "bad";
    bad.input_shape = Shape({1, 4, 4});
    bad.num_classes = 2;
    bad.layers.push_back(LayerSpec::conv2d(2, 3, 1, 1));
    bad.layers.push_back(LayerSpec::flatten());
    bad.layers.push_back(LayerSpec::linear(2));
    bad.split_points = {{"SP1", 1}}; // not after a Lif
    CHECK_THROWS_AS(bad.finalize(), DomainError);

    NetworkGraph cross;
    cross.name = "cross";
    cross.input_shape = Shape({1, 4, 4});
    cross.num_classes = 2;
    cross.layers.push_back(LayerSpec::lif_layer());      // 0
    cross.layers.push_back(LayerSpec::conv2d(1, 3, 1, 1)); // 1
    cross.layers.push_back(LayerSpec::lif_layer());      // 2
    cross.layers.push_back(LayerSpec::residual_add(0));  // 3 references layer 0
    cross.layers.push_back(LayerSpec::flatten());
    cross.layers.push_back(LayerSpec::linear(2));
    cross.split_points = {{"SP1", 3}}; // would sever the skip edge
    CHECK_THROWS_AS(cross.finalize(), DomainError);
}

TEST_CASE("split execution equals monolithic execution bit-for-bit") {
    for (const NetworkGraph &base :
         {make_resnet_mini(3, 10), make_vgg_mini(3, 10)}) {
        const NetworkGraph net = seeded_net(base, 99);
        for (uint32_t sample = 0; sample < 3; ++sample) {
            // monolithic
            NetStates mono = make_states(net);
            // split: independent state objects for each side
            for (const auto &[sp, split] : net.split_points) {
                NetStates edge = make_states(net, 0, split);
                NetStates cloud = make_states(net, split, net.layers.size());
                NetStates mono_st = make_states(net);
                for (uint32_t t = 1; t <= 2; ++t) {
                    const SpikeTensor frame =
                        random_frame(net.input_shape, 1000 + sample * 10 + t);
                    const Activation whole =
                        forward_timestep(net, mono_st, frame, 0, net.layers.size());
                    const Activation mid =
                        forward_timestep(net, edge, frame, 0, split);
                    const Activation split_out = forward_timestep(
                        net, cloud, mid, split, net.layers.size());
                    CHECK(std::get<DenseTensor>(whole).data ==
                          std::get<DenseTensor>(split_out).data);
                }
            }
            (void)mono;
        }
    }
}

TEST_CASE("empty range returns the input unchanged") {
    const NetworkGraph net = seeded_net(make_resnet_mini(3, 10), 5);
    NetStates st = make_states(net);
    const SpikeTensor frame = random_frame(net.input_shape, 1);
    const Activation out = forward_timestep(net, st, frame, 2, 2);
    CHECK(std::get<SpikeTensor>(out) == frame);
}

TEST_CASE("membrane state carries across timesteps") {
    const NetworkGraph net = seeded_net(make_resnet_mini(3, 10), 7);
    const size_t split = net.split_index("SP1");
    const SpikeTensor frame = random_frame(net.input_shape, 3);

    NetStates carry = make_states(net, 0, split);
    const Activation first = forward_timestep(net, carry, frame, 0, split);
    const Activation second = forward_timestep(net, carry, frame, 0, split);
    // same input, different membrane history -> different spikes
    CHECK_FALSE(std::get<SpikeTensor>(first) == std::get<SpikeTensor>(second));

    // resetting between the two restores equality
    NetStates fresh = make_states(net, 0, split);
    const Activation a = forward_timestep(net, fresh, frame, 0, split);
    reset_state(fresh);
    const Activation b = forward_timestep(net, fresh, frame, 0, split);
    CHECK(std::get<SpikeTensor>(a) == std::get<SpikeTensor>(b));
}

TEST_CASE("reset gives fresh-run equivalence") {
    const NetworkGraph net = seeded_net(make_vgg_mini(3, 10), 13);
    NetStates st = make_states(net);
    // run sample A
    forward_timestep(net, st, random_frame(net.input_shape, 51), 0,
                     net.layers.size());
    reset_state(st);
    // run sample B after reset
    const Activation reused = forward_timestep(
        net, st, random_frame(net.input_shape, 52), 0, net.layers.size());
    // fresh engine, same sample B
    NetStates fresh = make_states(net);
    const Activation direct = forward_timestep(
        net, fresh, random_frame(net.input_shape, 52), 0, net.layers.size());
    CHECK(std::get<DenseTensor>(reused).data == std::get<DenseTensor>(direct).data);
}

TEST_CASE("determinism across identical runs") {
    const NetworkGraph net = seeded_net(make_resnet_mini(3, 10), 21);
    const auto l1 = run_monolithic_logits(net, 400, 2);
    const auto l2 = run_monolithic_logits(net, 400, 2);
    CHECK(l1 == l2);
}

TEST_CASE("activity trace measures per-layer input activity") {
    const NetworkGraph net = seeded_net(make_resnet_mini(3, 10), 31);
    NetStates st = make_states(net);
    ActivityTrace trace;
    const SpikeTensor frame = random_frame(net.input_shape, 77);
    forward_timestep(net, st, frame, 0, net.layers.size(), &trace);
    CHECK(trace.timesteps == 1);
    CHECK(trace.mean_rate(0) == doctest::Approx(firing_rate(frame)));
    for (size_t i = 0; i < net.layers.size(); ++i) {
        CHECK(trace.mean_rate(i) >= 0.0);
        CHECK(trace.mean_rate(i) <= 1.0);
    }
}

TEST_CASE("range errors") {
    const NetworkGraph net = seeded_net(make_resnet_mini(3, 10), 1);
    NetStates st = make_states(net);
    const SpikeTensor frame = random_frame(net.input_shape, 1);
    CHECK_THROWS_AS(forward_timestep(net, st, frame, 5, 3), DomainError);
    CHECK_THROWS_AS(forward_timestep(net, st, frame, 0, 99), DomainError);
    // wrong entry shape
    CHECK_THROWS_AS(forward_timestep(net, st, frame, 3, 6), DomainError);
}

} // TEST_SUITE
