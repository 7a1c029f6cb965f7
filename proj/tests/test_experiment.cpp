#include <doctest.h>

#include <thread>

#include "neucodex/experiment.hpp"

using namespace neucodex;

namespace {

ExperimentConfig base_cfg() {
    ExperimentConfig cfg;
    cfg.topology = "resnet-mini";
    cfg.split = "SP7";
    cfg.label = ConfigLabel::FpB;
    cfg.t_max = 2;
    cfg.samples = 3;
    cfg.seed = 11;
    cfg.out_csv.clear();
    return cfg;
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("config validation rejects bad combinations") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::DpB;
    cfg.alpha = 0.0; // alpha must be in (0,1) for dynamic configs
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    ExperimentConfig eo = base_cfg();
    eo.split = "edge-only";
    eo.label = ConfigLabel::FpB; // +B has no meaning without a split
    CHECK_THROWS_AS(eo.validate(), ConfigError);

    ExperimentConfig nosplit = base_cfg();
    nosplit.split = "SP99";
    CHECK_THROWS_AS(build_setup(nosplit), ConfigError);

    CHECK_THROWS_AS(parse_label("X+B"), ConfigError);
    CHECK(parse_label("D+B") == ConfigLabel::DpB);
    CHECK(label_name(ConfigLabel::DB) == "D-B");
}

TEST_CASE("fixed no-bottleneck runs use every timestep and raw payloads") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::FB;
    const RunReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 3);
    for (const SampleRow &r : rep.rows) {
        CHECK(r.t_exit == 2);
        CHECK(r.uplink_feature_bits == 16384); // (512,4,4) x 2 timesteps
        CHECK(r.raw_feature_bits == 16384);
        CHECK(r.compression_ratio == 1.0);
    }
}

TEST_CASE("bottlenecked SP7 run reproduces the 2048x payload arithmetic") {
    ExperimentConfig cfg = base_cfg();
    const RunReport rep = run_experiment(cfg);
    for (const SampleRow &r : rep.rows) {
        CHECK(r.uplink_feature_bits == 4ull * r.t_exit);
        CHECK(r.raw_feature_bits == 8192ull * r.t_exit);
        CHECK(r.compression_ratio == 2048.0);
    }
}

TEST_CASE("simulated runs are a pure function of the config") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::DpB;
    cfg.alpha = 0.2;
    const RunReport a = run_experiment(cfg);
    const RunReport b = run_experiment(cfg);
    CHECK(a.rows_csv() == b.rows_csv());
    CHECK(a.aggregates_csv() == b.aggregates_csv());
}

TEST_CASE("event input drives a 2-channel topology") {
    ExperimentConfig cfg = base_cfg();
    cfg.input = InputKind::SyntheticEvents;
    cfg.label = ConfigLabel::DB;
    cfg.alpha = 0.3;
    cfg.samples = 2;
    const RunReport rep = run_experiment(cfg);
    CHECK(rep.rows.size() == 2);
    for (const SampleRow &r : rep.rows)
        CHECK(r.compression_ratio == 1.0);
}

TEST_CASE("edge-only baseline transmits nothing") {
    ExperimentConfig cfg = base_cfg();
    cfg.split = "edge-only";
    cfg.label = ConfigLabel::DB;
    cfg.alpha = 0.3;
    const RunReport rep = run_experiment(cfg);
    for (const SampleRow &r : rep.rows) {
        CHECK(r.uplink_feature_bits == 0);
        CHECK(r.uplink_wire_bytes == 0);
        CHECK(r.latency.uplink_s == 0.0);
    }
}

TEST_CASE("alpha sweep: T_avg is non-decreasing in alpha") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::DpB;
    cfg.samples = 6;
    cfg.t_max = 4;
    const SweepResult sweep = run_sweep(
        SweepAxis::Alpha, {"0.11", "0.3", "0.6", "0.9", "0.99"}, cfg);
    double prev = 0.0;
    for (const auto &[value, report] : sweep.runs) {
        const double t_avg = report.aggregates.at("D+B").t_avg;
        CHECK(t_avg >= prev);
        prev = t_avg;
    }
    CHECK(sweep.csv.find("sweep_axis,sweep_value,") == 0);
}

TEST_CASE("t_max sweep: a larger budget cannot lower T_avg") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::DpB;
    cfg.alpha = 0.9;
    cfg.samples = 4;
    const SweepResult sweep = run_sweep(SweepAxis::TMax, {"4", "8"}, cfg);
    const double t4 = sweep.runs[0].second.aggregates.at("D+B").t_avg;
    const double t8 = sweep.runs[1].second.aggregates.at("D+B").t_avg;
    CHECK(t8 >= t4);
}

TEST_CASE("channel sweep scales uplink bits with the code size") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::FpB; // fixed timesteps isolate the payload axis
    cfg.samples = 2;
    const SweepResult sweep =
        run_sweep(SweepAxis::BottleneckChannels, {"2", "4", "8"}, cfg);
    std::vector<uint64_t> bits;
    for (const auto &[value, report] : sweep.runs)
        bits.push_back(report.aggregates.at("F+B").total_uplink_feature_bits);
    CHECK(bits[1] == 2 * bits[0]);
    CHECK(bits[2] == 4 * bits[0]);
}

TEST_CASE("socket mode matches simulated mode on decision columns") {
    ExperimentConfig cfg = base_cfg();
    cfg.label = ConfigLabel::DpB;
    cfg.alpha = 0.2;
    cfg.samples = 3;
    const RunReport sim = run_experiment(cfg);

    const ExperimentSetup setup = build_setup(cfg);
    TcpListener listener("127.0.0.1", 0);
    std::thread cloud([&] {
        auto conn = listener.accept();
        const CloudSessionConfig ccfg{&setup.net, setup.codec.get(),
                                      setup.split_index, setup.digest};
        try {
            while (true)
                cloud_run_session(ccfg, *conn);
        } catch (const TransportError &) {
        }
    });

    ExperimentConfig sock = cfg;
    sock.mode = RunMode::Socket;
    sock.connect_host = "127.0.0.1";
    sock.connect_port = listener.port();
    const RunReport real = run_experiment(sock);
    cloud.join();

    REQUIRE(real.rows.size() == sim.rows.size());
    for (size_t i = 0; i < sim.rows.size(); ++i) {
        CHECK(real.rows[i].prediction == sim.rows[i].prediction);
        CHECK(real.rows[i].t_exit == sim.rows[i].t_exit);
        CHECK(real.rows[i].uplink_feature_bits == sim.rows[i].uplink_feature_bits);
        CHECK(real.rows[i].uplink_wire_bytes == sim.rows[i].uplink_wire_bytes);
    }
}

} // TEST_SUITE
