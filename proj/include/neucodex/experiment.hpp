#pragma once

#include <iosfwd>
#include <memory>

#include "neucodex/encoding.hpp"
#include "neucodex/metrics.hpp"
#include "neucodex/model_io.hpp"
#include "neucodex/session.hpp"

namespace neucodex {

// The four compared configurations: fixed/dynamic timesteps x with/without
// the compression bottleneck.
enum class ConfigLabel { FB, DB, FpB, DpB };

std::string label_name(ConfigLabel l);            // "F-B" "D-B" "F+B" "D+B"
ConfigLabel parse_label(const std::string &name); // ConfigError on junk

enum class InputKind { SyntheticImages, SyntheticEvents, EventFile };
enum class RunMode { Simulated, Socket };

struct ExperimentConfig {
    std::string topology = "resnet-mini"; // resnet-mini | vgg-mini | file path
    std::string split = "SP7";            // split point name, or "edge-only"
    ConfigLabel label = ConfigLabel::DpB;
    double alpha = 0.9;
    uint32_t t_max = 2;
    ChannelModel channel;
    uint64_t seed = 1;
    uint32_t samples = 10;
    InputKind input = InputKind::SyntheticImages;
    std::string event_file;
    uint32_t num_classes = 10;
    uint32_t bottleneck_channels = 4;
    uint32_t bottleneck_kernel = 0; // 0 = per-split default rule
    uint32_t bottleneck_stride = 0;
    RunMode mode = RunMode::Simulated;
    std::string connect_host = "127.0.0.1";
    uint16_t connect_port = 47301;
    std::string weights_file; // optional container; default seeded init
    std::string out_csv;      // optional; aggregates go to <out>.agg.csv
    EnergyModel energy;
    bool verbose = false;

    bool dynamic() const {
        return label == ConfigLabel::DB || label == ConfigLabel::DpB;
    }
    bool bottlenecked() const {
        return label == ConfigLabel::FpB || label == ConfigLabel::DpB;
    }
    void validate() const; // ConfigError with an actionable message
};

// Everything a node needs to participate in a run. Both sides construct it
// from the same flags, which is what makes the HELLO digests agree.
struct ExperimentSetup {
    NetworkGraph net;
    std::unique_ptr<Bottleneck> codec; // engaged for +B labels
    size_t split_index = 0;
    bool edge_only = false;
    uint32_t weights_crc = 0;
    uint64_t digest = 0;
};

ExperimentSetup build_setup(const ExperimentConfig &cfg);

// Frame provider for one sample, per the configured input source.
FrameProvider make_frames(const ExperimentConfig &cfg, const NetworkGraph &net,
                          uint64_t sample_id);

// Runs the sample loop (in-process simulated link, or a socket client
// against a running serve_cloud) and writes the CSVs when configured.
// Simulated-mode reports are a pure function of the config: wall-clock
// compute columns are zeroed there and only logged when verbose.
RunReport run_experiment(const ExperimentConfig &cfg);

enum class SweepAxis { Alpha, TMax, BottleneckChannels, Split };
SweepAxis parse_axis(const std::string &name);

struct SweepResult {
    std::vector<std::pair<std::string, RunReport>> runs; // (value, report)
    std::string csv; // combined rows with sweep_axis/sweep_value columns
};

SweepResult run_sweep(SweepAxis axis, const std::vector<std::string> &values,
                      const ExperimentConfig &base);

struct ServeOptions {
    std::string listen_host = "0.0.0.0";
    uint16_t port = 47301;
    int64_t max_sessions = -1; // -1 = until killed
};

// Long-running cloud node: accepts connections, serves sequential sessions
// per connection, logs one summary line per session.
void serve_cloud(const ExperimentConfig &cfg, const ServeOptions &opts,
                 std::ostream &log);

} // namespace neucodex
