#include "neucodex/experiment.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace neucodex {

std::string label_name(ConfigLabel l) {
    switch (l) {
    case ConfigLabel::FB: return "F-B";
    case ConfigLabel::DB: return "D-B";
    case ConfigLabel::FpB: return "F+B";
    case ConfigLabel::DpB: return "D+B";
    }
    return "?";
}

ConfigLabel parse_label(const std::string &name) {
    if (name == "F-B") return ConfigLabel::FB;
    if (name == "D-B") return ConfigLabel::DB;
    if (name == "F+B") return ConfigLabel::FpB;
    if (name == "D+B") return ConfigLabel::DpB;
    throw ConfigError("unknown config label '" + name +
                      "' (expected F-B, D-B, F+B or D+B)");
}

SweepAxis parse_axis(const std::string &name) {
    if (name == "alpha") return SweepAxis::Alpha;
    if (name == "t_max" || name == "tmax") return SweepAxis::TMax;
    if (name == "bottleneck_channels" || name == "channels")
        return SweepAxis::BottleneckChannels;
    if (name == "split") return SweepAxis::Split;
    throw ConfigError("unknown sweep axis '" + name +
                      "' (expected alpha, t_max, bottleneck_channels or split)");
}

void ExperimentConfig::validate() const {
    if (samples < 1)
        throw ConfigError("samples must be >= 1");
    if (t_max < 1 || t_max > 255)
        throw ConfigError("t_max must be in [1,255]");
    if (dynamic() && !(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("dynamic configs (D-B, D+B) require alpha in (0,1), got " +
                          std::to_string(alpha));
    if (bottlenecked() && split == "edge-only")
        throw ConfigError("+B labels need a real split point, not edge-only");
    if (bottlenecked() && bottleneck_channels < 1)
        throw ConfigError("+B labels require bottleneck_channels >= 1");
    if (input == InputKind::EventFile && event_file.empty())
        throw ConfigError("input=event-file requires an event file path");
    if (num_classes < 2)
        throw ConfigError("num_classes must be >= 2");
    channel.validate();
    energy.validate();
}

namespace {

NetworkGraph build_topology(const ExperimentConfig &cfg) {
    const uint32_t in_ch = cfg.input == InputKind::SyntheticImages ? 3 : 2;
    if (cfg.topology == "resnet-mini")
        return make_resnet_mini(in_ch, cfg.num_classes);
    if (cfg.topology == "vgg-mini")
        return make_vgg_mini(in_ch, cfg.num_classes);
    NetworkGraph net = load_topology_file(cfg.topology);
    if (cfg.input != InputKind::SyntheticImages && net.input_shape[0] != 2)
        throw ConfigError("event input needs a 2-channel topology, file has " +
                          std::to_string(net.input_shape[0]));
    return net;
}

} // namespace

ExperimentSetup build_setup(const ExperimentConfig &cfg) {
    cfg.validate();
    ExperimentSetup setup;
    setup.net = build_topology(cfg);

    setup.edge_only = cfg.split == "edge-only";
    setup.split_index =
        setup.edge_only ? setup.net.layers.size() : setup.net.split_index(cfg.split);

    if (cfg.bottlenecked()) {
        const Shape &split_shape = setup.net.split_shape(setup.split_index);
        BottleneckConfig bcfg;
        if (cfg.bottleneck_kernel > 0) {
            bcfg.in_shape = split_shape;
            bcfg.code_channels = cfg.bottleneck_channels;
            bcfg.kernel = cfg.bottleneck_kernel;
            bcfg.stride = cfg.bottleneck_stride > 0 ? cfg.bottleneck_stride
                                                    : cfg.bottleneck_kernel;
            bcfg.validate();
        } else {
            bcfg = default_bottleneck(split_shape, cfg.bottleneck_channels);
        }
        setup.codec = std::make_unique<Bottleneck>(bcfg);
    }

    std::vector<WeightEntry> entries;
    std::vector<uint8_t> container_bytes;
    if (!cfg.weights_file.empty()) {
        std::ifstream f(cfg.weights_file, std::ios::binary);
        if (!f)
            throw ConfigError("cannot open weights file " + cfg.weights_file);
        container_bytes.assign((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
        entries = load_container(container_bytes);
    } else {
        entries = seeded_init(setup.net, setup.codec.get(),
                              derive_seed(cfg.seed, "weights"));
        container_bytes = save_container(entries);
    }
    apply_entries(setup.net, setup.codec.get(), entries);
    setup.weights_crc = container_crc(container_bytes);
    setup.digest = config_digest(setup.net, setup.codec.get(), setup.weights_crc);
    return setup;
}

FrameProvider make_frames(const ExperimentConfig &cfg, const NetworkGraph &net,
                          uint64_t sample_id) {
    switch (cfg.input) {
    case InputKind::SyntheticImages: {
        auto img = std::make_shared<StaticImage>(
            synthetic_image(net.input_shape, cfg.seed, sample_id));
        const uint64_t rate_seed =
            derive_seed(derive_seed(cfg.seed, "rate"), sample_id);
        return [img, rate_seed](uint32_t t) {
            return rate_encode(*img, t, rate_seed);
        };
    }
    case InputKind::SyntheticEvents: {
        const EventStream ev = synthetic_events(
            static_cast<uint16_t>(net.input_shape[2]),
            static_cast<uint16_t>(net.input_shape[1]), cfg.seed, sample_id);
        auto frames = std::make_shared<std::vector<SpikeTensor>>(
            event_bin(ev, cfg.t_max));
        return [frames](uint32_t t) { return frames->at(t - 1); };
    }
    case InputKind::EventFile: {
        const EventStream ev = load_event_file(
            cfg.event_file, static_cast<uint16_t>(net.input_shape[2]),
            static_cast<uint16_t>(net.input_shape[1]));
        auto frames = std::make_shared<std::vector<SpikeTensor>>(
            event_bin(ev, cfg.t_max));
        return [frames](uint32_t t) { return frames->at(t - 1); };
    }
    }
    throw ConfigError("unknown input kind");
}

namespace {

SampleRow make_row(const ExperimentConfig &cfg, const ExperimentSetup &setup,
                   uint64_t sample_id, const EdgeRunResult &res) {
    SampleRow row;
    row.sample_id = sample_id;
    row.config = label_name(cfg.label);
    row.split = cfg.split;
    row.t_max = cfg.t_max;
    row.t_exit = res.t_exit;
    row.prediction = res.prediction;
    row.uplink_feature_bits = res.uplink_feature_bits;
    row.uplink_wire_bytes = res.uplink_wire_bytes;
    row.downlink_wire_bytes = res.downlink_wire_bytes;

    if (setup.edge_only) {
        row.raw_feature_bits = 0;
        row.compression_ratio = 1.0;
    } else {
        const Shape &split_shape = setup.net.split_shape(setup.split_index);
        row.raw_feature_bits = payload_bits(split_shape, res.t_exit);
        row.compression_ratio =
            compression_ratio(row.raw_feature_bits, res.uplink_feature_bits);
    }

    // Energy: every edge layer plus the bottleneck encoder's two stages,
    // with per-sample measured input activity as the firing rate.
    std::vector<LayerEnergyInput> edge_layers;
    for (size_t i = 0; i < setup.split_index; ++i)
        edge_layers.push_back({static_cast<double>(setup.net.layer_flops(i)),
                               res.net_activity.mean_rate(i)});
    std::vector<LayerEnergyInput> codec_layers;
    if (setup.codec && res.codec_activity.steps > 0) {
        const Bottleneck &b = *setup.codec;
        const double steps = res.codec_activity.steps;
        codec_layers.push_back(
            {static_cast<double>(b.enc_conv.flops(b.cfg.in_shape)),
             res.codec_activity.conv_in_sum / steps});
        codec_layers.push_back(
            {static_cast<double>(b.enc_bn.flops(b.cfg.code_shape())),
             res.codec_activity.bn_in_sum / steps});
    }
    row.codec_energy_j = edge_energy(codec_layers, res.t_exit, cfg.energy);
    for (const LayerEnergyInput &l : codec_layers)
        edge_layers.push_back(l);
    row.edge_energy_j = edge_energy(edge_layers, res.t_exit, cfg.energy);

    // Simulated mode keeps the CSV a pure function of the config: transport
    // times are virtual, compute wall time is only logged.
    if (cfg.mode == RunMode::Simulated) {
        row.latency = LatencyBreakdown::of(0.0, res.uplink_s, 0.0,
                                           res.downlink_wait_s);
    } else {
        // Socket mode: downlink_s is measured from FEATURE-sent to
        // LOGITS-received, so the cloud's compute time is folded into it.
        row.latency = LatencyBreakdown::of(res.edge_compute_wall_s, res.uplink_s,
                                           0.0, res.downlink_wait_s);
    }
    return row;
}

void write_reports(const ExperimentConfig &cfg, const RunReport &report) {
    if (cfg.out_csv.empty())
        return;
    std::ofstream rows(cfg.out_csv, std::ios::binary);
    if (!rows)
        throw ConfigError("cannot write " + cfg.out_csv);
    rows << report.rows_csv();
    std::ofstream agg(cfg.out_csv + ".agg.csv", std::ios::binary);
    agg << report.aggregates_csv();
}

RunReport run_edge_only(const ExperimentConfig &cfg, const ExperimentSetup &setup) {
    std::vector<SampleRow> rows;
    ExitPolicy policy{cfg.alpha, cfg.t_max};
    if (!cfg.dynamic())
        policy.alpha = 0.5; // unused; keep the invariant alpha in (0,1)
    for (uint64_t s = 0; s < cfg.samples; ++s) {
        const EdgeRunResult res = run_monolithic_sample(
            setup.net, policy, cfg.dynamic(), make_frames(cfg, setup.net, s));
        SampleRow row = make_row(cfg, setup, s, res);
        if (cfg.verbose)
            std::cerr << "sample " << s << " t_exit=" << res.t_exit
                      << " wall=" << res.edge_compute_wall_s << "s\n";
        rows.push_back(std::move(row));
    }
    return RunReport::build(std::move(rows));
}

} // namespace

RunReport run_experiment(const ExperimentConfig &cfg) {
    const ExperimentSetup setup = build_setup(cfg);
    if (setup.edge_only) {
        RunReport report = run_edge_only(cfg, setup);
        write_reports(cfg, report);
        return report;
    }

    ExitPolicy policy{cfg.alpha, cfg.t_max};
    if (!cfg.dynamic())
        policy.alpha = 0.5; // ignored on the fixed path

    std::vector<SampleRow> rows;
    const CloudSessionConfig cloud_cfg{&setup.net, setup.codec.get(),
                                       setup.split_index, setup.digest};

    auto edge_loop = [&](Transport &transport) {
        for (uint64_t s = 0; s < cfg.samples; ++s) {
            EdgeSessionConfig ecfg;
            ecfg.net = &setup.net;
            ecfg.codec = setup.codec.get();
            ecfg.split = setup.split_index;
            ecfg.policy = policy;
            ecfg.dynamic = cfg.dynamic();
            ecfg.session_id = static_cast<uint32_t>(s + 1);
            ecfg.digest = setup.digest;
            const EdgeRunResult res =
                edge_run_sample(ecfg, make_frames(cfg, setup.net, s), transport);
            if (cfg.verbose)
                std::cerr << "sample " << s << " t_exit=" << res.t_exit
                          << " edge_wall=" << res.edge_compute_wall_s << "s\n";
            rows.push_back(make_row(cfg, setup, s, res));
        }
    };

    if (cfg.mode == RunMode::Simulated) {
        SimLink link(cfg.channel);
        std::exception_ptr cloud_error;
        std::thread cloud([&] {
            try {
                while (true)
                    cloud_run_session(cloud_cfg, link.cloud_end());
            } catch (const TransportError &) {
                // link closed: normal end of run
            } catch (...) {
                cloud_error = std::current_exception();
            }
        });
        try {
            edge_loop(link.edge_end());
        } catch (...) {
            link.close();
            cloud.join();
            throw;
        }
        link.close();
        cloud.join();
        if (cloud_error)
            std::rethrow_exception(cloud_error);
    } else {
        auto transport = tcp_connect(cfg.connect_host, cfg.connect_port);
        edge_loop(*transport);
        transport->close();
    }

    RunReport report = RunReport::build(std::move(rows));
    write_reports(cfg, report);
    return report;
}

SweepResult run_sweep(SweepAxis axis, const std::vector<std::string> &values,
                      const ExperimentConfig &base) {
    if (values.empty())
        throw ConfigError("sweep needs at least one value");
    SweepResult result;
    std::string axis_name;
    std::ostringstream csv;
    bool header_done = false;
    for (const std::string &v : values) {
        ExperimentConfig cfg = base;
        cfg.out_csv.clear(); // the combined CSV is the artifact
        switch (axis) {
        case SweepAxis::Alpha:
            axis_name = "alpha";
            cfg.alpha = std::stod(v);
            break;
        case SweepAxis::TMax:
            axis_name = "t_max";
            cfg.t_max = static_cast<uint32_t>(std::stoul(v));
            break;
        case SweepAxis::BottleneckChannels:
            axis_name = "bottleneck_channels";
            cfg.bottleneck_channels = static_cast<uint32_t>(std::stoul(v));
            break;
        case SweepAxis::Split:
            axis_name = "split";
            cfg.split = v;
            break;
        }
        RunReport report = run_experiment(cfg);
        const std::string rows = report.rows_csv();
        std::istringstream lines(rows);
        std::string line;
        bool first = true;
        while (std::getline(lines, line)) {
            if (first) {
                if (!header_done) {
                    csv << "sweep_axis,sweep_value," << line << '\n';
                    header_done = true;
                }
                first = false;
                continue;
            }
            csv << axis_name << ',' << v << ',' << line << '\n';
        }
        result.runs.emplace_back(v, std::move(report));
    }
    result.csv = csv.str();
    if (!base.out_csv.empty()) {
        std::ofstream f(base.out_csv, std::ios::binary);
        if (!f)
            throw ConfigError("cannot write " + base.out_csv);
        f << result.csv;
    }
    return result;
}

void serve_cloud(const ExperimentConfig &cfg, const ServeOptions &opts,
                 std::ostream &log) {
    const ExperimentSetup setup = build_setup(cfg);
    if (setup.edge_only)
        throw ConfigError("serve: edge-only has no cloud side");
    const CloudSessionConfig cloud_cfg{&setup.net, setup.codec.get(),
                                       setup.split_index, setup.digest};

    TcpListener listener(opts.listen_host, opts.port);
    log << "neucodex-cloud listening on port " << listener.port() << std::endl;

    int64_t served = 0;
    while (opts.max_sessions < 0 || served < opts.max_sessions) {
        std::unique_ptr<TcpTransport> conn;
        try {
            conn = listener.accept();
        } catch (const TransportError &e) {
            log << "accept: " << e.what() << std::endl;
            break;
        }
        log << "connection accepted" << std::endl;
        while (opts.max_sessions < 0 || served < opts.max_sessions) {
            CloudSessionSummary summary;
            try {
                summary = cloud_run_session(cloud_cfg, *conn);
            } catch (const TransportError &) {
                break; // peer closed the connection
            }
            ++served;
            log << "session " << summary.session_id << ": steps=" << summary.steps
                << " t_exit=" << summary.edge_t_exit
                << (summary.clean_exit ? " clean" : "")
                << (summary.error.empty() ? "" : " error=" + summary.error)
                << " cloud_compute=" << csv_double(summary.compute_wall_s) << "s"
                << std::endl;
        }
        conn->close();
    }
}

} // namespace neucodex
