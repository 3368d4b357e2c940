#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "instrumentation.hpp"

namespace minidpsnn {

// Canonical raster: `step,neuron_id` lines sorted by step then id.
// This text is the unit of cross-configuration comparison.
inline std::string raster_text(const std::vector<RasterEvent>& raster) {
    std::ostringstream os;
    for (const auto& ev : raster) os << ev.step << ',' << ev.neuron << '\n';
    return os.str();
}

// 64-bit FNV-1a over the canonical raster text.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t raster_hash(const std::vector<RasterEvent>& raster) {
    return fnv1a64(raster_text(raster));
}

struct RunReport {
    RunConfig config;
    double wall_seconds = 0.0;
    double sim_seconds = 0.0;
    std::uint64_t spike_count = 0;
    std::uint64_t synaptic_events = 0;
    std::uint64_t external_events = 0;
    double mean_rate_hz = 0.0;
    PhaseBreakdown phases;
    TrafficStats traffic;
    std::optional<EnergyReport> energy;
    std::uint64_t raster_hash = 0;
};

struct ScalingRow {
    std::uint32_t n_ranks = 0;
    double wall_seconds = 0.0;
    double speedup = 1.0;
    std::uint64_t spike_count = 0;
    std::uint64_t raster_hash = 0;
    double mean_packet_bytes = 0.0;
    std::uint64_t packets = 0;
    std::uint64_t payload_bytes = 0;
    std::array<double, kPhaseCount> phase_seconds{};
    double pooled_loop_seconds = 0.0; // sum of per-rank loop times
};

struct ScalingReport {
    RunConfig config; // shared by all rows except n_ranks
    std::vector<ScalingRow> rows;
    bool complete = true; // false when a run failed and the sweep aborted
};

// --- JSON serialization -------------------------------------------------

inline void to_json(nlohmann::json& j, const GridConfig& c) {
    j = {{"grid_x", c.grid_x},
         {"grid_y", c.grid_y},
         {"neurons_per_column", c.neurons_per_column},
         {"excitatory_fraction", c.excitatory_fraction},
         {"out_degree_exc", c.out_degree_exc},
         {"out_degree_inh", c.out_degree_inh},
         {"intra_fraction", c.intra_fraction},
         {"remote_kernel", c.remote_kernel == RemoteKernel::MooreUniform ? "moore-uniform"
                                                                         : "gaussian"},
         {"kernel_sigma", c.kernel_sigma},
         {"delay_min", c.delay_min},
         {"delay_max", c.delay_max},
         {"seed", c.seed}};
}
inline void from_json(const nlohmann::json& j, GridConfig& c) {
    j.at("grid_x").get_to(c.grid_x);
    j.at("grid_y").get_to(c.grid_y);
    j.at("neurons_per_column").get_to(c.neurons_per_column);
    j.at("excitatory_fraction").get_to(c.excitatory_fraction);
    j.at("out_degree_exc").get_to(c.out_degree_exc);
    j.at("out_degree_inh").get_to(c.out_degree_inh);
    j.at("intra_fraction").get_to(c.intra_fraction);
    c.remote_kernel = j.at("remote_kernel").get<std::string>() == "gaussian"
                          ? RemoteKernel::Gaussian
                          : RemoteKernel::MooreUniform;
    j.at("kernel_sigma").get_to(c.kernel_sigma);
    j.at("delay_min").get_to(c.delay_min);
    j.at("delay_max").get_to(c.delay_max);
    j.at("seed").get_to(c.seed);
}

inline void to_json(nlohmann::json& j, const LifcaParams& p) {
    j = {{"tau_m", p.tau_m},     {"v_rest", p.v_rest},   {"v_reset", p.v_reset},
         {"v_threshold", p.v_threshold}, {"tau_arp", p.tau_arp}, {"g_c", p.g_c},
         {"tau_c", p.tau_c},     {"alpha_c", p.alpha_c}, {"dt", p.dt}};
}
inline void from_json(const nlohmann::json& j, LifcaParams& p) {
    j.at("tau_m").get_to(p.tau_m);
    j.at("v_rest").get_to(p.v_rest);
    j.at("v_reset").get_to(p.v_reset);
    j.at("v_threshold").get_to(p.v_threshold);
    j.at("tau_arp").get_to(p.tau_arp);
    j.at("g_c").get_to(p.g_c);
    j.at("tau_c").get_to(p.tau_c);
    j.at("alpha_c").get_to(p.alpha_c);
    j.at("dt").get_to(p.dt);
}

inline void to_json(nlohmann::json& j, const ExternalStimulus& s) {
    j = {{"equivalent_synapses", s.equivalent_synapses},
         {"rate_hz", s.rate_hz},
         {"weight_mv", s.weight_mv}};
}
inline void from_json(const nlohmann::json& j, ExternalStimulus& s) {
    j.at("equivalent_synapses").get_to(s.equivalent_synapses);
    j.at("rate_hz").get_to(s.rate_hz);
    j.at("weight_mv").get_to(s.weight_mv);
}

inline void to_json(nlohmann::json& j, const SynapseWeights& w) {
    j = {{"excitatory_mv", w.excitatory_mv}, {"inhibitory_mv", w.inhibitory_mv}};
}
inline void from_json(const nlohmann::json& j, SynapseWeights& w) {
    j.at("excitatory_mv").get_to(w.excitatory_mv);
    j.at("inhibitory_mv").get_to(w.inhibitory_mv);
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = {{"grid", c.grid},
         {"lifca", c.lifca},
         {"stimulus", c.stimulus},
         {"weights", c.weights},
         {"n_ranks", c.n_ranks},
         {"ranks_per_node", c.ranks_per_node},
         {"mode", c.exchange_mode == ExchangeMode::Flat ? "flat" : "broker"},
         {"send", c.send_mode == SendMode::Collective ? "collective" : "p2p"},
         {"sim_seconds", c.sim_seconds}};
}
inline void from_json(const nlohmann::json& j, RunConfig& c) {
    j.at("grid").get_to(c.grid);
    j.at("lifca").get_to(c.lifca);
    j.at("stimulus").get_to(c.stimulus);
    j.at("weights").get_to(c.weights);
    j.at("n_ranks").get_to(c.n_ranks);
    j.at("ranks_per_node").get_to(c.ranks_per_node);
    c.exchange_mode = parse_exchange_mode(j.at("mode").get<std::string>());
    c.send_mode = parse_send_mode(j.at("send").get<std::string>());
    j.at("sim_seconds").get_to(c.sim_seconds);
}

inline void to_json(nlohmann::json& j, const PhaseBreakdown::Row& r) {
    j = nlohmann::json::object();
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        j["seconds"][kPhaseNames[i]] = r.seconds[i];
        j["fraction"][kPhaseNames[i]] = r.fraction[i];
    }
    j["loop_seconds"] = r.loop_seconds;
    j["residual_fraction"] = r.residual_fraction;
}
inline void from_json(const nlohmann::json& j, PhaseBreakdown::Row& r) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        j.at("seconds").at(kPhaseNames[i]).get_to(r.seconds[i]);
        j.at("fraction").at(kPhaseNames[i]).get_to(r.fraction[i]);
    }
    j.at("loop_seconds").get_to(r.loop_seconds);
    j.at("residual_fraction").get_to(r.residual_fraction);
}

inline void to_json(nlohmann::json& j, const PhaseBreakdown& b) {
    j = {{"per_rank", b.per_rank}, {"aggregate", b.aggregate}};
}
inline void from_json(const nlohmann::json& j, PhaseBreakdown& b) {
    j.at("per_rank").get_to(b.per_rank);
    j.at("aggregate").get_to(b.aggregate);
}

inline void to_json(nlohmann::json& j, const TrafficStats::Row& r) {
    j = {{"packets", r.packets},
         {"payload_bytes", r.payload_bytes},
         {"max_packet_bytes", r.max_packet_bytes},
         {"mean_packet_bytes", r.mean_packet_bytes}};
}
inline void from_json(const nlohmann::json& j, TrafficStats::Row& r) {
    j.at("packets").get_to(r.packets);
    j.at("payload_bytes").get_to(r.payload_bytes);
    j.at("max_packet_bytes").get_to(r.max_packet_bytes);
    j.at("mean_packet_bytes").get_to(r.mean_packet_bytes);
}

inline void to_json(nlohmann::json& j, const TrafficStats& s) {
    j = {{"per_rank", s.per_rank}, {"aggregate", s.aggregate}};
}
inline void from_json(const nlohmann::json& j, TrafficStats& s) {
    j.at("per_rank").get_to(s.per_rank);
    j.at("aggregate").get_to(s.aggregate);
}

inline void to_json(nlohmann::json& j, const EnergyReport& e) {
    j = {{"wall_seconds", e.wall_seconds},
         {"joules", e.joules},
         {"mean_watts", e.mean_watts},
         {"synaptic_events", e.synaptic_events},
         {"microjoules_per_event", e.microjoules_per_event},
         {"baseline_watts", e.baseline_watts}};
}
inline void from_json(const nlohmann::json& j, EnergyReport& e) {
    j.at("wall_seconds").get_to(e.wall_seconds);
    j.at("joules").get_to(e.joules);
    j.at("mean_watts").get_to(e.mean_watts);
    j.at("synaptic_events").get_to(e.synaptic_events);
    j.at("microjoules_per_event").get_to(e.microjoules_per_event);
    j.at("baseline_watts").get_to(e.baseline_watts);
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
    j = {{"config", r.config},
         {"wall_seconds", r.wall_seconds},
         {"sim_seconds", r.sim_seconds},
         {"spike_count", r.spike_count},
         {"synaptic_events", r.synaptic_events},
         {"external_events", r.external_events},
         {"mean_rate_hz", r.mean_rate_hz},
         {"phases", r.phases},
         {"traffic", r.traffic},
         {"raster_hash", r.raster_hash}};
    if (r.energy) j["energy"] = *r.energy;
}
inline void from_json(const nlohmann::json& j, RunReport& r) {
    j.at("config").get_to(r.config);
    j.at("wall_seconds").get_to(r.wall_seconds);
    j.at("sim_seconds").get_to(r.sim_seconds);
    j.at("spike_count").get_to(r.spike_count);
    j.at("synaptic_events").get_to(r.synaptic_events);
    j.at("external_events").get_to(r.external_events);
    j.at("mean_rate_hz").get_to(r.mean_rate_hz);
    j.at("phases").get_to(r.phases);
    j.at("traffic").get_to(r.traffic);
    j.at("raster_hash").get_to(r.raster_hash);
    if (j.contains("energy")) r.energy = j.at("energy").get<EnergyReport>();
}

inline void to_json(nlohmann::json& j, const ScalingRow& r) {
    j = {{"n_ranks", r.n_ranks},
         {"wall_seconds", r.wall_seconds},
         {"speedup", r.speedup},
         {"spike_count", r.spike_count},
         {"raster_hash", r.raster_hash},
         {"mean_packet_bytes", r.mean_packet_bytes},
         {"packets", r.packets},
         {"payload_bytes", r.payload_bytes}};
    for (std::size_t i = 0; i < kPhaseCount; ++i)
        j["phase_seconds"][kPhaseNames[i]] = r.phase_seconds[i];
    j["pooled_loop_seconds"] = r.pooled_loop_seconds;
}
inline void from_json(const nlohmann::json& j, ScalingRow& r) {
    j.at("n_ranks").get_to(r.n_ranks);
    j.at("wall_seconds").get_to(r.wall_seconds);
    j.at("speedup").get_to(r.speedup);
    j.at("spike_count").get_to(r.spike_count);
    j.at("raster_hash").get_to(r.raster_hash);
    j.at("mean_packet_bytes").get_to(r.mean_packet_bytes);
    j.at("packets").get_to(r.packets);
    j.at("payload_bytes").get_to(r.payload_bytes);
    for (std::size_t i = 0; i < kPhaseCount; ++i)
        j.at("phase_seconds").at(kPhaseNames[i]).get_to(r.phase_seconds[i]);
    j.at("pooled_loop_seconds").get_to(r.pooled_loop_seconds);
}

inline void to_json(nlohmann::json& j, const ScalingReport& r) {
    j = {{"config", r.config}, {"rows", r.rows}, {"complete", r.complete}};
}
inline void from_json(const nlohmann::json& j, ScalingReport& r) {
    j.at("config").get_to(r.config);
    j.at("rows").get_to(r.rows);
    j.at("complete").get_to(r.complete);
}

// --- CSV ----------------------------------------------------------------

inline void write_run_csv(const RunReport& r, std::ostream& os) {
    os << "n_ranks,sim_seconds,wall_seconds,spike_count,mean_rate_hz,synaptic_events,"
          "external_events,packets,payload_bytes,mean_packet_bytes,max_packet_bytes,"
          "comp_frac,mem_frac,comm_frac,sync_frac,residual_frac,raster_hash\n";
    const auto& agg = r.phases.aggregate;
    os << r.config.n_ranks << ',' << r.sim_seconds << ',' << r.wall_seconds << ','
       << r.spike_count << ',' << r.mean_rate_hz << ',' << r.synaptic_events << ','
       << r.external_events << ',' << r.traffic.aggregate.packets << ','
       << r.traffic.aggregate.payload_bytes << ',' << r.traffic.aggregate.mean_packet_bytes
       << ',' << r.traffic.aggregate.max_packet_bytes;
    for (std::size_t i = 0; i < kPhaseCount; ++i) os << ',' << agg.fraction[i];
    os << ',' << agg.residual_fraction << ',' << r.raster_hash << '\n';
}

inline void write_scaling_csv(const ScalingReport& r, std::ostream& os) {
    os << "n_ranks,wall_seconds,speedup,spike_count,packets,payload_bytes,"
          "mean_packet_bytes,raster_hash\n";
    for (const auto& row : r.rows)
        os << row.n_ranks << ',' << row.wall_seconds << ',' << row.speedup << ','
           << row.spike_count << ',' << row.packets << ',' << row.payload_bytes << ','
           << row.mean_packet_bytes << ',' << row.raster_hash << '\n';
}

} // namespace minidpsnn
