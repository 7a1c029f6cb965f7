#include "neucodex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace neucodex {

double synops(double flops, double rate, double timesteps) {
    if (!(flops >= 0.0))
        throw DomainError("synops: flops must be >= 0");
    if (!(rate >= 0.0 && rate <= 1.0))
        throw DomainError("synops: rate must be in [0,1]");
    if (!(timesteps >= 0.0))
        throw DomainError("synops: timesteps must be >= 0");
    return flops * rate * timesteps;
}

double edge_energy(std::span<const LayerEnergyInput> layers, double t_used,
                   const EnergyModel &model) {
    model.validate();
    double total_synops = 0.0;
    for (const LayerEnergyInput &l : layers)
        total_synops += synops(l.flops, l.rate, t_used);
    // Divide by 1e12 (exact in binary) rather than multiplying by 1e-12 so
    // round numbers like 23 uJ come out bit-exact.
    return total_synops * model.pj_per_synop / 1e12;
}

void LatencyBreakdown::validate() const {
    const double parts[] = {edge_compute_s, uplink_s, cloud_compute_s, downlink_s};
    double sum = 0.0;
    for (double p : parts) {
        if (!(p >= 0.0))
            throw DomainError("LatencyBreakdown: negative component");
        sum += p;
    }
    if (std::abs(sum - total_s) > 1e-12 * std::max(1.0, std::abs(total_s)))
        throw DomainError("LatencyBreakdown: total does not equal sum of parts");
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {

double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty())
        return 0.0;
    // nearest-rank
    const size_t idx = static_cast<size_t>(
        std::min<double>(sorted.size() - 1.0,
                         std::ceil(q * static_cast<double>(sorted.size())) - 1.0));
    return sorted[std::max<size_t>(idx, 0)];
}

} // namespace

RunReport RunReport::build(std::vector<SampleRow> rows) {
    if (rows.empty())
        throw ReportError("RunReport: no rows");
    RunReport rep;
    rep.rows = std::move(rows);

    std::map<std::string, std::vector<const SampleRow *>> groups;
    for (const SampleRow &r : rep.rows) {
        r.latency.validate();
        if (r.t_exit < 1 || r.t_exit > r.t_max)
            throw ReportError("RunReport: t_exit outside [1, t_max]");
        groups[r.config].push_back(&r);
    }

    for (auto &[config, members] : groups) {
        Aggregate a;
        a.config = config;
        a.samples = members.size();
        a.t_max = members.front()->t_max;
        std::vector<double> totals;
        std::vector<uint64_t> exit_counts(a.t_max, 0);
        double t_sum = 0.0, e_sum = 0.0, ratio_sum = 0.0, total_sum = 0.0;
        for (const SampleRow *r : members) {
            if (r->t_max != a.t_max)
                throw ReportError("RunReport: inconsistent t_max within config " +
                                  config);
            t_sum += r->t_exit;
            e_sum += r->edge_energy_j;
            ratio_sum += r->compression_ratio;
            total_sum += r->latency.total_s;
            totals.push_back(r->latency.total_s);
            a.total_uplink_feature_bits += r->uplink_feature_bits;
            a.total_uplink_wire_bytes += r->uplink_wire_bytes;
            exit_counts[r->t_exit - 1] += 1;
        }
        const double n = static_cast<double>(a.samples);
        a.t_avg = t_sum / n;
        a.mean_total_s = total_sum / n;
        a.mean_edge_energy_j = e_sum / n;
        a.mean_compression_ratio = ratio_sum / n;
        std::sort(totals.begin(), totals.end());
        a.p50_total_s = percentile(totals, 0.50);
        a.p95_total_s = percentile(totals, 0.95);
        a.exit_fraction.resize(a.t_max);
        for (uint32_t t = 0; t < a.t_max; ++t)
            a.exit_fraction[t] = static_cast<double>(exit_counts[t]) / n;
        rep.aggregates[config] = std::move(a);
    }
    return rep;
}

std::string RunReport::rows_csv() const {
    std::ostringstream os;
    os << "sample_id,config,split,t_max,t_exit,prediction,"
          "uplink_feature_bits,raw_feature_bits,compression_ratio,"
          "uplink_wire_bytes,downlink_wire_bytes,"
          "edge_compute_s,uplink_s,cloud_compute_s,downlink_s,total_s,"
          "edge_energy_j,codec_energy_j\n";
    for (const SampleRow &r : rows) {
        os << r.sample_id << ',' << r.config << ',' << r.split << ',' << r.t_max
           << ',' << r.t_exit << ',' << r.prediction << ',' << r.uplink_feature_bits
           << ',' << r.raw_feature_bits << ',' << csv_double(r.compression_ratio)
           << ',' << r.uplink_wire_bytes << ',' << r.downlink_wire_bytes << ','
           << csv_double(r.latency.edge_compute_s) << ','
           << csv_double(r.latency.uplink_s) << ','
           << csv_double(r.latency.cloud_compute_s) << ','
           << csv_double(r.latency.downlink_s) << ','
           << csv_double(r.latency.total_s) << ',' << csv_double(r.edge_energy_j)
           << ',' << csv_double(r.codec_energy_j) << '\n';
    }
    return os.str();
}

std::string RunReport::aggregates_csv() const {
    std::ostringstream os;
    os << "config,samples,t_max,t_avg,mean_total_s,p50_total_s,p95_total_s,"
          "total_uplink_feature_bits,total_uplink_wire_bytes,"
          "mean_edge_energy_j,mean_compression_ratio,exit_fractions\n";
    for (const auto &[config, a] : aggregates) {
        os << config << ',' << a.samples << ',' << a.t_max << ','
           << csv_double(a.t_avg) << ',' << csv_double(a.mean_total_s) << ','
           << csv_double(a.p50_total_s) << ',' << csv_double(a.p95_total_s) << ','
           << a.total_uplink_feature_bits << ',' << a.total_uplink_wire_bytes << ','
           << csv_double(a.mean_edge_energy_j) << ','
           << csv_double(a.mean_compression_ratio) << ',';
        for (size_t t = 0; t < a.exit_fraction.size(); ++t) {
            if (t)
                os << '|';
            os << csv_double(a.exit_fraction[t]);
        }
        os << '\n';
    }
    return os.str();
}

} // namespace neucodex
