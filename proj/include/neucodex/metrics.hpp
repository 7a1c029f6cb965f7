#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "neucodex/errors.hpp"

namespace neucodex {

// Loihi-style estimate: ~23 pJ per synaptic operation.
struct EnergyModel {
    double pj_per_synop = 23.0;

    void validate() const {
        if (!(pj_per_synop > 0.0))
            throw DomainError("EnergyModel: pj_per_synop must be > 0");
    }
};

// flops x firing rate x timesteps.
double synops(double flops, double rate, double timesteps);

struct LayerEnergyInput {
    double flops = 0.0;
    double rate = 0.0; // mean input activity measured on this sample's run
};

// Sum over layers of synops(flops, rate, t_used) * pJ, in joules.
double edge_energy(std::span<const LayerEnergyInput> layers, double t_used,
                   const EnergyModel &model);

struct LatencyBreakdown {
    double edge_compute_s = 0.0;
    double uplink_s = 0.0;
    double cloud_compute_s = 0.0;
    double downlink_s = 0.0;
    double total_s = 0.0; // invariant: sum of the four parts

    static LatencyBreakdown of(double edge, double up, double cloud, double down) {
        return {edge, up, cloud, down, edge + up + cloud + down};
    }
    void validate() const;
};

struct SampleRow {
    uint64_t sample_id = 0;
    std::string config; // F-B | D-B | F+B | D+B
    std::string split;
    uint32_t t_max = 0;
    uint32_t t_exit = 0;
    uint32_t prediction = 0;
    uint64_t uplink_feature_bits = 0; // logical spike bits actually sent
    uint64_t raw_feature_bits = 0;    // what -B would have sent for this t_exit
    uint64_t uplink_wire_bytes = 0;
    uint64_t downlink_wire_bytes = 0;
    double compression_ratio = 1.0;
    LatencyBreakdown latency;
    double edge_energy_j = 0.0;  // includes the bottleneck encoder's share
    double codec_energy_j = 0.0; // that share alone, so both conventions derive
};

struct Aggregate {
    std::string config;
    uint64_t samples = 0;
    uint32_t t_max = 0;
    double t_avg = 0.0;
    double mean_total_s = 0.0;
    double p50_total_s = 0.0;
    double p95_total_s = 0.0;
    uint64_t total_uplink_feature_bits = 0;
    uint64_t total_uplink_wire_bytes = 0;
    double mean_edge_energy_j = 0.0;
    double mean_compression_ratio = 0.0;
    std::vector<double> exit_fraction; // index t-1 = fraction exiting at t
};

// Per-sample rows plus per-config aggregates. Aggregates are recomputable
// from the rows; rows of one config must share t_max (ReportError otherwise).
struct RunReport {
    std::vector<SampleRow> rows;
    std::map<std::string, Aggregate> aggregates;

    static RunReport build(std::vector<SampleRow> rows);

    // Deterministic CSV serializations (column order documented in README).
    std::string rows_csv() const;
    std::string aggregates_csv() const;
};

std::string csv_double(double v); // %.9g, the report's number format

} // namespace neucodex
