#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "engine.hpp"
#include "report.hpp"

namespace minidpsnn {

struct SimulationOutcome {
    RunReport report;
    EngineResult engine;
};

// Full pipeline: topology -> partition -> routed per-step simulation ->
// instrumented report. A prebuilt network (matching config.grid) can be
// passed to amortize generation across runs of the same configuration.
inline SimulationOutcome run_simulation_full(const RunConfig& config,
                                             const Topology* prebuilt = nullptr) {
    config.validate();
    Topology local;
    if (!prebuilt) {
        local = build_network(config.grid, config.weights);
        prebuilt = &local;
    }
    const Topology& topo = *prebuilt;
    const PartitionMap part = partition_columns(topo, config.n_ranks);
    const RoutingTable routing = build_routing_tables(topo, part);

    InProcessTransport transport(config.n_ranks);
    EngineConfig ec = config.engine_config();
    EngineResult engine = run_engine(topo, part, routing, ec, transport);

    SimulationOutcome out;
    out.report.config = config;
    out.report.sim_seconds = config.sim_seconds;
    out.report.wall_seconds = engine.loop_wall_seconds;
    out.report.spike_count = engine.spike_count;
    out.report.synaptic_events = engine.delivered_synaptic_events + engine.external_events;
    out.report.external_events = engine.external_events;
    out.report.mean_rate_hz = static_cast<double>(engine.spike_count) /
                              (static_cast<double>(topo.n_neurons) * config.sim_seconds);
    out.report.phases = phase_report(engine.timers);
    out.report.traffic = traffic_summary(engine.packet_log, config.n_ranks);
    out.report.raster_hash = raster_hash(engine.raster);
    out.engine = std::move(engine);
    return out;
}

inline RunReport run_simulation(const RunConfig& config) {
    return run_simulation_full(config).report;
}

// One run per rank count; all rows must share the raster hash.
inline ScalingReport strong_scaling_sweep(const RunConfig& config,
                                          const std::vector<std::uint32_t>& rank_list,
                                          const Topology* prebuilt = nullptr) {
    if (rank_list.empty()) throw std::invalid_argument("rank list must be nonempty");
    if (!std::is_sorted(rank_list.begin(), rank_list.end()))
        throw std::invalid_argument("rank list must be ascending");

    Topology local;
    if (!prebuilt) {
        config.grid.validate();
        local = build_network(config.grid, config.weights);
        prebuilt = &local;
    }

    ScalingReport report;
    report.config = config;
    for (std::uint32_t ranks : rank_list) {
        RunConfig rc = config;
        rc.n_ranks = ranks;
        SimulationOutcome outcome;
        try {
            outcome = run_simulation_full(rc, prebuilt);
        } catch (...) {
            report.complete = false;
            throw;
        }
        ScalingRow row;
        row.n_ranks = ranks;
        row.wall_seconds = outcome.report.wall_seconds;
        row.spike_count = outcome.report.spike_count;
        row.raster_hash = outcome.report.raster_hash;
        row.packets = outcome.report.traffic.aggregate.packets;
        row.payload_bytes = outcome.report.traffic.aggregate.payload_bytes;
        row.mean_packet_bytes = outcome.report.traffic.aggregate.mean_packet_bytes;
        row.phase_seconds = outcome.report.phases.aggregate.seconds;
        row.pooled_loop_seconds = outcome.report.phases.aggregate.loop_seconds;
        row.speedup = report.rows.empty()
                          ? 1.0
                          : report.rows.front().wall_seconds / row.wall_seconds;
        report.rows.push_back(row);
    }
    return report;
}

struct RealtimeCheck {
    double ratio = 0.0;
    bool pass = false;
};

// Real-time workpoint: wall clock no longer than simulated time.
inline RealtimeCheck realtime_check(const RunReport& report) {
    RealtimeCheck check;
    check.ratio = report.wall_seconds / report.sim_seconds;
    check.pass = check.ratio <= 1.0;
    return check;
}

namespace detail {
inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    return os;
}
} // namespace detail

inline void emit_report(const RunReport& report, const std::string& format,
                        const std::string& path) {
    auto os = detail::open_out(path);
    if (format == "json") {
        os << nlohmann::json(report).dump(2) << '\n';
    } else if (format == "csv") {
        write_run_csv(report, os);
    } else {
        throw std::invalid_argument("format must be json or csv");
    }
}

inline void emit_report(const ScalingReport& report, const std::string& format,
                        const std::string& path) {
    auto os = detail::open_out(path);
    if (format == "json") {
        os << nlohmann::json(report).dump(2) << '\n';
    } else if (format == "csv") {
        write_scaling_csv(report, os);
    } else {
        throw std::invalid_argument("format must be json or csv");
    }
}

// Plot-data CSVs, one file per figure family.
inline void write_plot_data(const ScalingReport& report, const std::string& dir) {
    {
        auto os = detail::open_out(dir + "/scaling_curve.csv");
        os << "n_ranks,wall_seconds,speedup\n";
        for (const auto& r : report.rows)
            os << r.n_ranks << ',' << r.wall_seconds << ',' << r.speedup << '\n';
    }
    {
        auto os = detail::open_out(dir + "/phase_stack.csv");
        os << "n_ranks,computation_s,memory_management_s,communication_s,"
              "synchronization_s,residual_s,total_s\n";
        for (const auto& r : report.rows) {
            double sum = 0.0;
            for (double s : r.phase_seconds) sum += s;
            // total is the pooled loop time; the residual column closes the sum
            const double total = r.pooled_loop_seconds;
            os << r.n_ranks;
            for (double s : r.phase_seconds) os << ',' << s;
            os << ',' << (total - sum) << ',' << total << '\n';
        }
    }
    {
        auto os = detail::open_out(dir + "/packet_stats.csv");
        os << "n_ranks,packets,payload_bytes,mean_packet_bytes\n";
        for (const auto& r : report.rows)
            os << r.n_ranks << ',' << r.packets << ',' << r.payload_bytes << ','
               << r.mean_packet_bytes << '\n';
    }
}

inline void write_energy_plot_data(const EnergyReport& energy, const std::string& dir) {
    auto os = detail::open_out(dir + "/energy_bars.csv");
    os << "wall_seconds,joules,mean_watts,synaptic_events,microjoules_per_event\n";
    os << energy.wall_seconds << ',' << energy.joules << ',' << energy.mean_watts << ','
       << energy.synaptic_events << ',' << energy.microjoules_per_event << '\n';
}

} // namespace minidpsnn
