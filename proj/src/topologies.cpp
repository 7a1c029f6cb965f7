#include <fstream>

#include <nlohmann/json.hpp>

#include "neucodex/network.hpp"

namespace neucodex {

// Desk-scale stand-in for the spiking ResNet family: one residual block,
// LIF after every conv, split points at the post-LIF boundaries SP1..SP7.
// SP7 sits on a (512,4,4) spike map so the deepest-split payload arithmetic
// runs on the published shape. ~177k parameters at in_ch=3.
NetworkGraph make_resnet_mini(uint32_t in_ch, uint32_t num_classes) {
    NetworkGraph net;
    net.name = "resnet-mini";
    net.input_shape = Shape({in_ch, 32, 32});
    net.num_classes = num_classes;

    auto &L = net.layers;
    L.push_back(LayerSpec::conv2d(16, 3, 1, 1)); // 0: (16,32,32)
    L.push_back(LayerSpec::batchnorm());         // 1
    L.push_back(LayerSpec::lif_layer());         // 2  -> SP1
    L.push_back(LayerSpec::conv2d(32, 3, 2, 1)); // 3: (32,16,16)
    L.push_back(LayerSpec::batchnorm());         // 4
    L.push_back(LayerSpec::lif_layer());         // 5  -> SP3
    L.push_back(LayerSpec::conv2d(32, 3, 1, 1)); // 6
    L.push_back(LayerSpec::batchnorm());         // 7
    L.push_back(LayerSpec::residual_add(5));     // 8: skip from the SP3 spikes
    L.push_back(LayerSpec::lif_layer());         // 9
    L.push_back(LayerSpec::conv2d(64, 3, 2, 1)); // 10: (64,8,8)
    L.push_back(LayerSpec::batchnorm());         // 11
    L.push_back(LayerSpec::lif_layer());         // 12 -> SP5
    L.push_back(LayerSpec::conv2d(128, 3, 2, 1)); // 13: (128,4,4)
    L.push_back(LayerSpec::batchnorm());          // 14
    L.push_back(LayerSpec::lif_layer());          // 15
    L.push_back(LayerSpec::conv2d(512, 1, 1, 0)); // 16: (512,4,4)
    L.push_back(LayerSpec::batchnorm());          // 17
    L.push_back(LayerSpec::lif_layer());          // 18 -> SP7
    L.push_back(LayerSpec::avgpool(4));           // 19: (512,1,1)
    L.push_back(LayerSpec::flatten());            // 20
    L.push_back(LayerSpec::linear(num_classes));  // 21

    net.split_points = {{"SP1", 3}, {"SP3", 6}, {"SP5", 13}, {"SP7", 19}};
    net.finalize();
    return net;
}

// VGG-style stack at 64x64 input, five split points including SP8.
NetworkGraph make_vgg_mini(uint32_t in_ch, uint32_t num_classes) {
    NetworkGraph net;
    net.name = "vgg-mini";
    net.input_shape = Shape({in_ch, 64, 64});
    net.num_classes = num_classes;

    auto &L = net.layers;
    L.push_back(LayerSpec::conv2d(8, 3, 1, 1));   // 0: (8,64,64)
    L.push_back(LayerSpec::batchnorm());          // 1
    L.push_back(LayerSpec::lif_layer());          // 2  -> SP1
    L.push_back(LayerSpec::avgpool(2));           // 3: (8,32,32)
    L.push_back(LayerSpec::conv2d(16, 3, 1, 1));  // 4
    L.push_back(LayerSpec::batchnorm());          // 5
    L.push_back(LayerSpec::lif_layer());          // 6  -> SP3
    L.push_back(LayerSpec::avgpool(2));           // 7: (16,16,16)
    L.push_back(LayerSpec::conv2d(32, 3, 1, 1));  // 8
    L.push_back(LayerSpec::batchnorm());          // 9
    L.push_back(LayerSpec::lif_layer());          // 10 -> SP5
    L.push_back(LayerSpec::avgpool(2));           // 11: (32,8,8)
    L.push_back(LayerSpec::conv2d(64, 3, 1, 1));  // 12
    L.push_back(LayerSpec::batchnorm());          // 13
    L.push_back(LayerSpec::lif_layer());          // 14 -> SP7
    L.push_back(LayerSpec::avgpool(2));           // 15: (64,4,4)
    L.push_back(LayerSpec::conv2d(128, 3, 1, 1)); // 16
    L.push_back(LayerSpec::batchnorm());          // 17
    L.push_back(LayerSpec::lif_layer());          // 18 -> SP8
    L.push_back(LayerSpec::avgpool(4));           // 19: (128,1,1)
    L.push_back(LayerSpec::flatten());            // 20
    L.push_back(LayerSpec::linear(num_classes));  // 21

    net.split_points = {{"SP1", 3}, {"SP3", 7}, {"SP5", 11}, {"SP7", 15}, {"SP8", 19}};
    net.finalize();
    return net;
}

NetworkGraph load_topology_file(const std::string &path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open topology file " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("topology file " + path + ": " + e.what());
    }

    NetworkGraph net;
    try {
        net.name = j.value("name", std::string("custom"));
        std::vector<uint32_t> dims = j.at("input").get<std::vector<uint32_t>>();
        net.input_shape = Shape(dims);
        net.num_classes = j.at("num_classes").get<uint32_t>();
        for (const auto &lj : j.at("layers")) {
            const std::string kind = lj.at("kind").get<std::string>();
            if (kind == "conv2d") {
                net.layers.push_back(LayerSpec::conv2d(
                    lj.at("out_ch"), lj.at("kernel"), lj.value("stride", 1u),
                    lj.value("padding", 0u)));
            } else if (kind == "conv_transpose2d") {
                net.layers.push_back(LayerSpec::conv_transpose2d(
                    lj.at("out_ch"), lj.at("kernel"), lj.value("stride", 1u),
                    lj.value("padding", 0u)));
            } else if (kind == "batchnorm") {
                net.layers.push_back(LayerSpec::batchnorm());
            } else if (kind == "linear") {
                net.layers.push_back(LayerSpec::linear(lj.at("out_features")));
            } else if (kind == "avgpool") {
                net.layers.push_back(LayerSpec::avgpool(lj.at("window")));
            } else if (kind == "flatten") {
                net.layers.push_back(LayerSpec::flatten());
            } else if (kind == "lif") {
                LifParams p;
                p.tau = lj.value("tau", 2.0f);
                p.v_th = lj.value("v_th", 1.0f);
                p.v_reset = lj.value("v_reset", 0.0f);
                net.layers.push_back(LayerSpec::lif_layer(p));
            } else if (kind == "residual_add") {
                net.layers.push_back(LayerSpec::residual_add(lj.at("from")));
            } else {
                throw ConfigError("topology file: unknown layer kind '" + kind + "'");
            }
        }
        for (const auto &[sp, idx] : j.at("splits").items())
            net.split_points[sp] = idx.get<size_t>();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("topology file " + path + ": " + e.what());
    }
    try {
        net.finalize();
    } catch (const DomainError &e) {
        throw ConfigError("topology file " + path + ": " + e.what());
    }
    return net;
}

} // namespace neucodex
