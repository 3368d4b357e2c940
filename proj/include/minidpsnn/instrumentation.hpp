#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "model.hpp"

namespace minidpsnn {

// The four per-step task classes the benchmark separates.
enum class Phase : unsigned {
    Computation = 0,
    MemoryManagement = 1,
    Communication = 2,
    Synchronization = 3
};
inline constexpr std::size_t kPhaseCount = 4;
inline constexpr std::array<const char*, kPhaseCount> kPhaseNames = {
    "computation", "memory_management", "communication", "synchronization"};

// Rank-local accumulators; merged after the run.
struct PhaseTimers {
    std::array<double, kPhaseCount> seconds{};
    double loop_seconds = 0.0; // wall time of the instrumented main loop

    void add(Phase phase, double s) { seconds[static_cast<unsigned>(phase)] += s; }
};

struct PhaseBreakdown {
    struct Row {
        std::array<double, kPhaseCount> seconds{};
        std::array<double, kPhaseCount> fraction{};
        double loop_seconds = 0.0;
        double residual_fraction = 0.0;
    };
    std::vector<Row> per_rank;
    Row aggregate;
};

inline PhaseBreakdown::Row phase_row(const PhaseTimers& t) {
    if (t.loop_seconds <= 0.0)
        throw std::invalid_argument("phase report requires recorded samples");
    PhaseBreakdown::Row row;
    row.seconds = t.seconds;
    row.loop_seconds = t.loop_seconds;
    double sum = 0.0;
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        row.fraction[i] = t.seconds[i] / t.loop_seconds;
        sum += row.fraction[i];
    }
    row.residual_fraction = 1.0 - sum;
    return row;
}

inline PhaseBreakdown phase_report(const std::vector<PhaseTimers>& timers) {
    if (timers.empty())
        throw std::invalid_argument("phase report requires recorded samples");
    PhaseBreakdown report;
    PhaseTimers pooled;
    for (const auto& t : timers) {
        report.per_rank.push_back(phase_row(t));
        for (std::size_t i = 0; i < kPhaseCount; ++i) pooled.seconds[i] += t.seconds[i];
        pooled.loop_seconds += t.loop_seconds;
    }
    report.aggregate = phase_row(pooled);
    return report;
}

// One line per transmitted packet.
struct PacketRecord {
    std::uint64_t step = 0;
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    std::uint32_t bytes = 0;
    bool inter_node = false;
};

struct TrafficStats {
    struct Row {
        std::uint64_t packets = 0;
        std::uint64_t payload_bytes = 0;
        std::uint32_t max_packet_bytes = 0;
        double mean_packet_bytes = 0.0;
    };
    std::vector<Row> per_rank; // keyed by sending rank
    Row aggregate;
};

inline TrafficStats traffic_summary(const std::vector<PacketRecord>& log,
                                    std::uint32_t n_ranks) {
    TrafficStats stats;
    stats.per_rank.resize(n_ranks);
    for (const auto& rec : log) {
        auto& row = stats.per_rank.at(rec.src);
        row.packets += 1;
        row.payload_bytes += rec.bytes;
        row.max_packet_bytes = std::max(row.max_packet_bytes, rec.bytes);
        stats.aggregate.packets += 1;
        stats.aggregate.payload_bytes += rec.bytes;
        stats.aggregate.max_packet_bytes =
            std::max(stats.aggregate.max_packet_bytes, rec.bytes);
    }
    for (auto& row : stats.per_rank)
        row.mean_packet_bytes =
            row.packets ? static_cast<double>(row.payload_bytes) / row.packets : 0.0;
    stats.aggregate.mean_packet_bytes =
        stats.aggregate.packets
            ? static_cast<double>(stats.aggregate.payload_bytes) / stats.aggregate.packets
            : 0.0;
    return stats;
}

// Distinct ordered (src, dst) pairs crossing nodes during [step, step].
inline std::uint64_t inter_node_stream_count(const std::vector<PacketRecord>& log,
                                             std::uint64_t step) {
    std::vector<std::uint64_t> seen;
    for (const auto& rec : log) {
        if (rec.step != step || !rec.inter_node) continue;
        const std::uint64_t key = (std::uint64_t(rec.src) << 32) | rec.dst;
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
    }
    return seen.size();
}

// Power trace: ordered (t seconds, p watts) samples.
struct PowerSampleSeries {
    std::vector<double> t;
    std::vector<double> p;

    void append(double time_s, double watts) {
        if (!t.empty() && time_s <= t.back())
            throw std::invalid_argument("power samples must be strictly increasing in t");
        if (watts < 0.0) throw std::invalid_argument("power must be >= 0");
        t.push_back(time_s);
        p.push_back(watts);
    }
};

// CSV ingestion; two schemas auto-detected by column count:
//   t,p         (seconds, watts)
//   t,i,v       (seconds, amperes, volts; p = i*v)
// Lines starting with '#' and a non-numeric header line are skipped.
inline PowerSampleSeries load_power_log(std::istream& in) {
    PowerSampleSeries series;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b, c;
        if (!(ls >> a >> b)) continue; // header line
        if (ls >> c)
            series.append(a, b * c);
        else
            series.append(a, b);
    }
    if (series.t.empty()) throw std::invalid_argument("power log holds no samples");
    return series;
}

// Trapezoidal integral of power over [t0, t1], joules. Boundary values
// are linearly interpolated; the series must cover the window.
inline double integrate_energy(const PowerSampleSeries& s, double t0, double t1) {
    if (t1 <= t0) throw std::invalid_argument("t1 must exceed t0");
    if (s.t.size() < 2) throw std::invalid_argument("need at least 2 power samples");
    if (t0 < s.t.front() || t1 > s.t.back())
        throw std::invalid_argument("integration window outside sampled range");

    auto value_at = [&](double t, std::size_t hint) {
        std::size_t i = hint;
        while (s.t[i + 1] < t) ++i;
        const double f = (t - s.t[i]) / (s.t[i + 1] - s.t[i]);
        return s.p[i] + f * (s.p[i + 1] - s.p[i]);
    };

    double joules = 0.0;
    double prev_t = t0;
    double prev_p = value_at(t0, 0);
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        if (s.t[i] <= t0) continue;
        if (s.t[i] >= t1) break;
        joules += 0.5 * (prev_p + s.p[i]) * (s.t[i] - prev_t);
        prev_t = s.t[i];
        prev_p = s.p[i];
    }
    const double end_p = value_at(t1, 0);
    joules += 0.5 * (prev_p + end_p) * (t1 - prev_t);
    return joules;
}

inline double per_event_energy(double joules, std::uint64_t events) {
    if (events == 0) throw std::invalid_argument("per-event energy needs events > 0");
    return 1e6 * joules / static_cast<double>(events);
}

struct EnergyReport {
    double wall_seconds = 0.0;
    double joules = 0.0;
    double mean_watts = 0.0;
    std::uint64_t synaptic_events = 0;
    double microjoules_per_event = 0.0;
    double baseline_watts = 0.0; // subtracted before integration when nonzero
};

inline EnergyReport make_energy_report(const PowerSampleSeries& series, double t0, double t1,
                                       std::uint64_t events, double baseline_watts = 0.0) {
    EnergyReport rep;
    rep.wall_seconds = t1 - t0;
    rep.joules = integrate_energy(series, t0, t1) - baseline_watts * rep.wall_seconds;
    rep.mean_watts = rep.joules / rep.wall_seconds;
    rep.synaptic_events = events;
    rep.baseline_watts = baseline_watts;
    rep.microjoules_per_event = events ? per_event_energy(rep.joules, events) : 0.0;
    return rep;
}

struct RasterEvent {
    std::uint32_t step = 0;
    std::uint32_t neuron = 0;

    friend bool operator==(const RasterEvent&, const RasterEvent&) = default;
    friend bool operator<(const RasterEvent& a, const RasterEvent& b) {
        return a.step != b.step ? a.step < b.step : a.neuron < b.neuron;
    }
};

// Independent event tally from a finished run's raster: every spike
// delivers through the source's full out-degree, plus the external
// Poisson events regenerated from the keyed streams.
inline std::uint64_t count_synaptic_events(const std::vector<RasterEvent>& raster,
                                           const Topology& topo,
                                           const ExternalStimulus& stimulus,
                                           std::uint64_t duration_steps, std::uint64_t seed,
                                           double dt_ms = 1.0) {
    std::uint64_t count = 0;
    for (const auto& ev : raster) count += topo.out_degree(ev.neuron);
    for (std::uint32_t n = 0; n < topo.n_neurons; ++n)
        for (std::uint64_t s = 0; s < duration_steps; ++s)
            count += external_poisson_events(n, s, stimulus, seed, dt_ms);
    return count;
}

// Closed-form expectation used to cross-check published figures:
// neurons * rate * seconds * internal degree + neurons * external
// synapses * external rate * seconds.
inline double expected_synaptic_events(double neurons, double rate_hz, double seconds,
                                       double internal_degree, double external_synapses,
                                       double external_rate_hz) {
    return neurons * rate_hz * seconds * internal_degree +
           neurons * external_synapses * external_rate_hz * seconds;
}

} // namespace minidpsnn
