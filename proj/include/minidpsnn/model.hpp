#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace minidpsnn {

// Axonal delays live in circular queues of this many step buckets.
// Delays up to and including the horizon are representable because a
// bucket is always drained before same-step insertions reuse it.
inline constexpr std::uint32_t kDelayHorizon = 16;

enum class RemoteKernel { MooreUniform, Gaussian };

struct GridConfig {
    std::uint32_t grid_x = 4;
    std::uint32_t grid_y = 4;
    std::uint32_t neurons_per_column = 1250;
    double excitatory_fraction = 0.8;
    std::uint32_t out_degree_exc = 1000;
    std::uint32_t out_degree_inh = 1000;
    double intra_fraction = 0.8;
    RemoteKernel remote_kernel = RemoteKernel::MooreUniform;
    double kernel_sigma = 1.0; // columns; Gaussian kernel only
    std::uint32_t delay_min = 1;
    std::uint32_t delay_max = 16;
    std::uint64_t seed = 1;

    std::uint32_t columns() const { return grid_x * grid_y; }
    std::uint32_t total_neurons() const { return columns() * neurons_per_column; }
    std::uint32_t excitatory_per_column() const {
        return static_cast<std::uint32_t>(
            std::lround(excitatory_fraction * neurons_per_column));
    }

    void validate() const {
        if (grid_x == 0 || grid_y == 0)
            throw std::invalid_argument("grid dimensions must be nonzero");
        if (neurons_per_column == 0)
            throw std::invalid_argument("neurons_per_column must be nonzero");
        if (excitatory_fraction < 0.0 || excitatory_fraction > 1.0)
            throw std::invalid_argument("excitatory_fraction outside [0,1]");
        if (intra_fraction <= 0.0 || intra_fraction > 1.0)
            throw std::invalid_argument("intra_fraction outside (0,1]");
        if (delay_min < 1 || delay_max < delay_min || delay_max > kDelayHorizon)
            throw std::invalid_argument("delay_range outside [1, delay horizon]");
        if (out_degree_inh > excitatory_per_column())
            throw std::invalid_argument(
                "inhibitory out-degree exceeds excitatory targets in a column");
        std::uint32_t intra = static_cast<std::uint32_t>(
            std::lround(intra_fraction * out_degree_exc));
        if (neurons_per_column < 2 && intra > 0)
            throw std::invalid_argument(
                "excitatory intra out-degree exceeds addressable targets");
    }
};

// Per-synapse weights; population constants, stored per synapse so the
// table is self-contained. Defaults tuned once by bisection so both
// populations of the reference network fire in the low-Hz band.
// Recurrence must stay perturbative: inhibitory neurons receive no
// inhibition, so strong coupling drives them into saturation while
// silencing the excitatory cells.
struct SynapseWeights {
    float excitatory_mv = 0.02f;
    float inhibitory_mv = -0.04f;
};

struct ConnectivityStats {
    std::uint64_t total_synapses = 0;
    std::uint64_t exc_intra = 0;
    std::uint64_t exc_remote = 0;
    std::uint64_t inh_synapses = 0;
    std::uint32_t min_out_degree = 0;
    std::uint32_t max_out_degree = 0;
};

// Immutable network: column grid, population tags (implicit in the id
// layout) and one sorted synapse span per source neuron.
struct Topology {
    GridConfig config;
    std::uint32_t n_neurons = 0;

    // CSR-style spans, sorted by target id inside each span.
    std::vector<std::uint64_t> syn_offset; // size n_neurons + 1
    std::vector<std::uint32_t> syn_target;
    std::vector<std::uint8_t> syn_delay;
    std::vector<float> syn_weight;

    std::uint32_t column_of(std::uint32_t id) const {
        return id / config.neurons_per_column;
    }
    // Ids inside a column are laid out excitatory first.
    bool is_excitatory(std::uint32_t id) const {
        return id % config.neurons_per_column < config.excitatory_per_column();
    }
    std::uint32_t out_degree(std::uint32_t id) const {
        return static_cast<std::uint32_t>(syn_offset[id + 1] - syn_offset[id]);
    }
};

namespace detail {

struct PendingSynapse {
    std::uint32_t target;
    std::uint8_t delay;
    float weight;
};

// Valid neighbour columns of `col` under the configured kernel, with
// sampling weights renormalized over in-grid neighbours.
inline void neighbour_columns(const GridConfig& cfg, std::uint32_t col,
                              std::vector<std::uint32_t>& cols,
                              std::vector<double>& weights) {
    cols.clear();
    weights.clear();
    const std::int64_t gx = cfg.grid_x;
    const std::int64_t gy = cfg.grid_y;
    const std::int64_t cx = col % cfg.grid_x;
    const std::int64_t cy = col / cfg.grid_x;
    const std::int64_t radius =
        cfg.remote_kernel == RemoteKernel::MooreUniform
            ? 1
            : std::max<std::int64_t>(1, std::llround(std::ceil(3.0 * cfg.kernel_sigma)));
    for (std::int64_t dy = -radius; dy <= radius; ++dy) {
        for (std::int64_t dx = -radius; dx <= radius; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const std::int64_t nx = cx + dx;
            const std::int64_t ny = cy + dy;
            if (nx < 0 || nx >= gx || ny < 0 || ny >= gy) continue;
            cols.push_back(static_cast<std::uint32_t>(ny * gx + nx));
            weights.push_back(cfg.remote_kernel == RemoteKernel::MooreUniform
                                  ? 1.0
                                  : std::exp(-0.5 * (dx * dx + dy * dy) /
                                             (cfg.kernel_sigma * cfg.kernel_sigma)));
        }
    }
}

inline std::uint32_t sample_weighted(CounterRng& rng, const std::vector<double>& w,
                                     double total) {
    double u = rng.uniform_real() * total;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (u < w[i]) return static_cast<std::uint32_t>(i);
        u -= w[i];
    }
    return static_cast<std::uint32_t>(w.size() - 1);
}

} // namespace detail

inline std::uint32_t intra_out_degree(const GridConfig& cfg) {
    return static_cast<std::uint32_t>(std::lround(cfg.intra_fraction * cfg.out_degree_exc));
}

// Builds the grid and population layout only; synapse spans stay empty
// until generate_synapses.
inline Topology build_topology(const GridConfig& config) {
    config.validate();
    Topology topo;
    topo.config = config;
    topo.n_neurons = config.total_neurons();
    topo.syn_offset.assign(topo.n_neurons + 1, 0);
    return topo;
}

// Fills the synapse table. Each source neuron's draws come from a
// counter stream keyed (seed, neuron id), so the table is byte-identical
// no matter how the network is later partitioned.
inline ConnectivityStats generate_synapses(Topology& topo,
                                           const SynapseWeights& weights = {}) {
    const GridConfig& cfg = topo.config;
    const std::uint32_t npc = cfg.neurons_per_column;
    const std::uint32_t exc_per_col = cfg.excitatory_per_column();
    const std::uint32_t n_intra = intra_out_degree(cfg);
    const std::uint32_t n_remote = cfg.out_degree_exc - n_intra;
    const std::uint32_t delay_span = cfg.delay_max - cfg.delay_min + 1;

    ConnectivityStats stats;
    stats.min_out_degree = UINT32_MAX;

    std::uint64_t total = 0;
    for (std::uint32_t id = 0; id < topo.n_neurons; ++id)
        total += topo.is_excitatory(id) ? cfg.out_degree_exc : cfg.out_degree_inh;
    topo.syn_target.reserve(total);
    topo.syn_delay.reserve(total);
    topo.syn_weight.reserve(total);

    std::vector<std::uint32_t> nbr_cols;
    std::vector<double> nbr_weights;
    std::vector<detail::PendingSynapse> buf;
    std::uint32_t cached_col = UINT32_MAX;
    double nbr_total = 0.0;

    for (std::uint32_t id = 0; id < topo.n_neurons; ++id) {
        const std::uint32_t col = topo.column_of(id);
        const std::uint32_t col_base = col * npc;
        const std::uint32_t local = id - col_base;
        CounterRng rng(cfg.seed, rng_stream::synapses, id);
        buf.clear();

        if (topo.is_excitatory(id)) {
            if (col != cached_col) {
                detail::neighbour_columns(cfg, col, nbr_cols, nbr_weights);
                nbr_total = 0.0;
                for (double w : nbr_weights) nbr_total += w;
                cached_col = col;
            }
            for (std::uint32_t k = 0; k < n_intra; ++k) {
                std::uint32_t t = rng.uniform_below(npc - 1);
                if (t >= local) ++t; // skip self
                buf.push_back({col_base + t, 0, weights.excitatory_mv});
            }
            for (std::uint32_t k = 0; k < n_remote; ++k) {
                // No neighbours exist on a 1x1 grid; fold remote
                // synapses back into the column.
                if (nbr_cols.empty()) {
                    std::uint32_t t = rng.uniform_below(npc - 1);
                    if (t >= local) ++t;
                    buf.push_back({col_base + t, 0, weights.excitatory_mv});
                    continue;
                }
                const std::uint32_t ci =
                    cfg.remote_kernel == RemoteKernel::MooreUniform
                        ? rng.uniform_below(static_cast<std::uint32_t>(nbr_cols.size()))
                        : detail::sample_weighted(rng, nbr_weights, nbr_total);
                const std::uint32_t t = rng.uniform_below(npc);
                buf.push_back({nbr_cols[ci] * npc + t, 0, weights.excitatory_mv});
            }
            stats.exc_intra += n_intra;
            stats.exc_remote += n_remote;
        } else {
            // Inhibitory: excitatory targets in the same column only.
            for (std::uint32_t k = 0; k < cfg.out_degree_inh; ++k) {
                const std::uint32_t t = rng.uniform_below(exc_per_col);
                buf.push_back({col_base + t, 0, weights.inhibitory_mv});
            }
            stats.inh_synapses += cfg.out_degree_inh;
        }

        for (auto& syn : buf)
            syn.delay = static_cast<std::uint8_t>(
                cfg.delay_min + rng.uniform_below(delay_span));

        // Target-sorted spans give each rank a contiguous slice; stable
        // so duplicate targets keep generation order.
        std::stable_sort(buf.begin(), buf.end(),
                         [](const auto& a, const auto& b) { return a.target < b.target; });

        for (const auto& syn : buf) {
            topo.syn_target.push_back(syn.target);
            topo.syn_delay.push_back(syn.delay);
            topo.syn_weight.push_back(syn.weight);
        }
        topo.syn_offset[id + 1] = topo.syn_target.size();
        const auto deg = static_cast<std::uint32_t>(buf.size());
        stats.min_out_degree = std::min(stats.min_out_degree, deg);
        stats.max_out_degree = std::max(stats.max_out_degree, deg);
    }
    stats.total_synapses = topo.syn_target.size();
    if (topo.n_neurons == 0) stats.min_out_degree = 0;
    return stats;
}

inline Topology build_network(const GridConfig& config, const SynapseWeights& weights = {}) {
    Topology topo = build_topology(config);
    generate_synapses(topo, weights);
    return topo;
}

// Oracle-friendly dump: `src,tgt,delay,weight` sorted by source id.
inline void dump_topology(const Topology& topo, std::ostream& os) {
    for (std::uint32_t src = 0; src < topo.n_neurons; ++src) {
        for (std::uint64_t i = topo.syn_offset[src]; i < topo.syn_offset[src + 1]; ++i) {
            os << src << ',' << topo.syn_target[i] << ','
               << static_cast<unsigned>(topo.syn_delay[i]) << ',' << topo.syn_weight[i]
               << '\n';
        }
    }
}

} // namespace minidpsnn
