// Command-line harness: runs edge/cloud co-inference experiments over the
// simulated channel or real sockets, sweeps ablation knobs, serves the cloud
// node, and re-aggregates report CSVs.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "neucodex/experiment.hpp"
#include "neucodex/kernels.hpp"

using namespace neucodex;

namespace {

struct CommonFlags {
    std::string topology = "resnet-mini";
    std::string split = "SP7";
    std::string label = "D+B";
    double alpha = 0.9;
    uint32_t t_max = 2;
    uint64_t seed = 1;
    uint32_t samples = 100;
    std::string input = "synthetic-images";
    std::string event_file;
    uint32_t classes = 10;
    uint32_t bn_channels = 4;
    uint32_t bn_kernel = 0;
    uint32_t bn_stride = 0;
    double mbps = 18.9;
    double delay_s = 0.0;
    double jitter = 0.0;
    uint64_t jitter_seed = 0;
    std::string weights;
    std::string save_weights;
    double pj_per_synop = 23.0;
    bool serial = false;
    int threads = 0;
    bool verbose = false;
};

void add_common_flags(CLI::App *cmd, CommonFlags &f) {
    cmd->add_option("--topology", f.topology,
                    "resnet-mini, vgg-mini, or a topology JSON file");
    cmd->add_option("--split", f.split, "split point name (or edge-only)");
    cmd->add_option("--config", f.label, "F-B, D-B, F+B or D+B");
    cmd->add_option("--alpha", f.alpha, "confidence threshold in (0,1)");
    cmd->add_option("--t-max", f.t_max, "timestep budget");
    cmd->add_option("--seed", f.seed, "seed for weights, inputs and rate coding");
    cmd->add_option("--samples", f.samples, "samples per run");
    cmd->add_option("--input", f.input,
                    "synthetic-images, synthetic-events or event-file");
    cmd->add_option("--event-file", f.event_file,
                    "plain-text events: 't_us x y polarity' per line");
    cmd->add_option("--classes", f.classes, "number of classes");
    cmd->add_option("--bn-channels", f.bn_channels, "bottleneck code channels");
    cmd->add_option("--bn-kernel", f.bn_kernel,
                    "bottleneck conv kernel (0 = per-split default)");
    cmd->add_option("--bn-stride", f.bn_stride,
                    "bottleneck conv stride (defaults to the kernel)");
    cmd->add_option("--mbps", f.mbps, "channel throughput in Mbit/s");
    cmd->add_option("--delay-s", f.delay_s, "propagation delay in seconds");
    cmd->add_option("--jitter", f.jitter, "jitter fraction in [0,1)");
    cmd->add_option("--jitter-seed", f.jitter_seed, "jitter stream seed");
    cmd->add_option("--weights", f.weights, "weights container to load");
    cmd->add_option("--save-weights", f.save_weights,
                    "write the effective weights container here");
    cmd->add_option("--pj-per-synop", f.pj_per_synop, "energy model constant");
    cmd->add_flag("--serial", f.serial, "use the serial reference kernels");
    cmd->add_option("--threads", f.threads, "OpenMP thread count (0 = default)");
    cmd->add_flag("-v,--verbose", f.verbose, "log per-sample details to stderr");
    cmd->set_config("--config-file", "", "key=value config file");
}

ExperimentConfig to_config(const CommonFlags &f) {
    ExperimentConfig cfg;
    cfg.topology = f.topology;
    cfg.split = f.split;
    cfg.label = parse_label(f.label);
    cfg.alpha = f.alpha;
    cfg.t_max = f.t_max;
    cfg.seed = f.seed;
    cfg.samples = f.samples;
    if (f.input == "synthetic-images")
        cfg.input = InputKind::SyntheticImages;
    else if (f.input == "synthetic-events")
        cfg.input = InputKind::SyntheticEvents;
    else if (f.input == "event-file")
        cfg.input = InputKind::EventFile;
    else
        throw ConfigError("unknown input kind '" + f.input + "'");
    cfg.event_file = f.event_file;
    cfg.num_classes = f.classes;
    cfg.bottleneck_channels = f.bn_channels;
    cfg.bottleneck_kernel = f.bn_kernel;
    cfg.bottleneck_stride = f.bn_stride;
    cfg.channel.throughput_bps = f.mbps * 1e6;
    cfg.channel.propagation_delay_s = f.delay_s;
    cfg.channel.jitter_frac = f.jitter;
    cfg.channel.jitter_seed = f.jitter_seed;
    cfg.weights_file = f.weights;
    cfg.energy.pj_per_synop = f.pj_per_synop;
    cfg.verbose = f.verbose;
    return cfg;
}

void apply_exec_flags(const CommonFlags &f) {
    if (f.serial)
        kernels::set_default_exec(kernels::Exec::Reference);
#ifdef _OPENMP
    if (f.threads > 0)
        omp_set_num_threads(f.threads);
#else
    if (f.threads > 0)
        std::cerr << "built without OpenMP; --threads ignored\n";
#endif
}

void maybe_save_weights(const ExperimentConfig &cfg, const std::string &path) {
    if (path.empty())
        return;
    const ExperimentSetup setup = build_setup(cfg);
    const auto entries = collect_entries(setup.net, setup.codec.get());
    save_container_file(path, entries);
    std::cerr << "weights written to " << path << " (crc " << std::hex
              << setup.weights_crc << std::dec << ")\n";
}

std::pair<std::string, uint16_t> parse_endpoint(const std::string &ep) {
    const size_t colon = ep.rfind(':');
    if (colon == std::string::npos)
        throw ConfigError("expected host:port, got '" + ep + "'");
    const int port = std::stoi(ep.substr(colon + 1));
    if (port < 1 || port > 65535)
        throw ConfigError("port out of range in '" + ep + "'");
    return {ep.substr(0, colon), static_cast<uint16_t>(port)};
}

void print_aggregates(const RunReport &report) {
    std::cout << report.aggregates_csv();
}

// Rebuilds aggregates from a rows CSV written by `run`.
int report_command(const std::string &path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open " + path);
    std::string header;
    if (!std::getline(f, header))
        throw ReportError("empty report file");

    std::vector<std::string> columns;
    {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ','))
            columns.push_back(col);
    }
    auto col_index = [&columns](const std::string &name) {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name)
                return i;
        throw ReportError("report file lacks column " + name);
    };
    const size_t c_id = col_index("sample_id"), c_cfg = col_index("config"),
                 c_split = col_index("split"), c_tmax = col_index("t_max"),
                 c_texit = col_index("t_exit"), c_pred = col_index("prediction"),
                 c_bits = col_index("uplink_feature_bits"),
                 c_raw = col_index("raw_feature_bits"),
                 c_ratio = col_index("compression_ratio"),
                 c_up = col_index("uplink_wire_bytes"),
                 c_down = col_index("downlink_wire_bytes"),
                 c_e = col_index("edge_compute_s"), c_us = col_index("uplink_s"),
                 c_cs = col_index("cloud_compute_s"), c_ds = col_index("downlink_s"),
                 c_energy = col_index("edge_energy_j"),
                 c_codec = col_index("codec_energy_j");

    std::vector<SampleRow> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> v;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            v.push_back(cell);
        if (v.size() != columns.size())
            throw ReportError("malformed report row: " + line);
        SampleRow r;
        r.sample_id = std::stoull(v[c_id]);
        r.config = v[c_cfg];
        r.split = v[c_split];
        r.t_max = static_cast<uint32_t>(std::stoul(v[c_tmax]));
        r.t_exit = static_cast<uint32_t>(std::stoul(v[c_texit]));
        r.prediction = static_cast<uint32_t>(std::stoul(v[c_pred]));
        r.uplink_feature_bits = std::stoull(v[c_bits]);
        r.raw_feature_bits = std::stoull(v[c_raw]);
        r.compression_ratio = std::stod(v[c_ratio]);
        r.uplink_wire_bytes = std::stoull(v[c_up]);
        r.downlink_wire_bytes = std::stoull(v[c_down]);
        r.latency = LatencyBreakdown::of(std::stod(v[c_e]), std::stod(v[c_us]),
                                         std::stod(v[c_cs]), std::stod(v[c_ds]));
        r.edge_energy_j = std::stod(v[c_energy]);
        r.codec_energy_j = std::stod(v[c_codec]);
        rows.push_back(std::move(r));
    }
    print_aggregates(RunReport::build(std::move(rows)));
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"neucodex: split edge-cloud co-inference for spiking networks"};
    app.require_subcommand(1);

    CommonFlags rf;
    std::string run_mode = "sim";
    std::string connect = "127.0.0.1:47301";
    std::string run_out;
    CLI::App *run = app.add_subcommand("run", "run one experiment configuration");
    add_common_flags(run, rf);
    run->add_option("--mode", run_mode, "sim or socket");
    run->add_option("--connect", connect, "cloud address for socket mode");
    run->add_option("--out", run_out, "rows CSV path (aggregates in <out>.agg.csv)");

    CommonFlags sf;
    std::string sweep_axis = "alpha";
    std::string sweep_values;
    std::string sweep_out;
    CLI::App *sweep =
        app.add_subcommand("sweep", "run one configuration across an axis");
    add_common_flags(sweep, sf);
    sweep->add_option("--axis", sweep_axis,
                      "alpha, t_max, bottleneck_channels or split");
    sweep->add_option("--values", sweep_values, "comma-separated axis values")
        ->required();
    sweep->add_option("--out", sweep_out, "combined CSV path");

    CommonFlags vf;
    std::string listen = "0.0.0.0:47301";
    int64_t max_sessions = -1;
    CLI::App *serve = app.add_subcommand("serve", "run the cloud node");
    add_common_flags(serve, vf);
    serve->add_option("--listen", listen, "listen address host:port");
    serve->add_option("--max-sessions", max_sessions,
                      "stop after this many sessions (-1 = run until killed)");

    std::string report_in;
    CLI::App *report = app.add_subcommand("report", "aggregate a rows CSV");
    report->add_option("--in", report_in, "rows CSV written by run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            apply_exec_flags(rf);
            ExperimentConfig cfg = to_config(rf);
            cfg.out_csv = run_out;
            if (run_mode == "socket") {
                cfg.mode = RunMode::Socket;
                const auto [host, port] = parse_endpoint(connect);
                cfg.connect_host = host;
                cfg.connect_port = port;
            } else if (run_mode != "sim") {
                throw ConfigError("unknown mode '" + run_mode + "'");
            }
            maybe_save_weights(cfg, rf.save_weights);
            const RunReport rep = run_experiment(cfg);
            print_aggregates(rep);
            if (!run_out.empty())
                std::cerr << "rows written to " << run_out << "\n";
            return 0;
        }
        if (sweep->parsed()) {
            apply_exec_flags(sf);
            ExperimentConfig cfg = to_config(sf);
            cfg.out_csv = sweep_out;
            std::vector<std::string> values;
            std::istringstream vs(sweep_values);
            std::string v;
            while (std::getline(vs, v, ','))
                values.push_back(v);
            const SweepResult result =
                run_sweep(parse_axis(sweep_axis), values, cfg);
            for (const auto &[value, rep] : result.runs) {
                std::cout << "# " << sweep_axis << " = " << value << "\n";
                print_aggregates(rep);
            }
            if (!sweep_out.empty())
                std::cerr << "combined rows written to " << sweep_out << "\n";
            return 0;
        }
        if (serve->parsed()) {
            apply_exec_flags(vf);
            ExperimentConfig cfg = to_config(vf);
            maybe_save_weights(cfg, vf.save_weights);
            const auto [host, port] = parse_endpoint(listen);
            ServeOptions opts;
            opts.listen_host = host;
            opts.port = port;
            opts.max_sessions = max_sessions;
            serve_cloud(cfg, opts, std::cout);
            return 0;
        }
        if (report->parsed())
            return report_command(report_in);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
