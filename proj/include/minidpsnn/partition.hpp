#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace minidpsnn {

// Column -> rank assignment. Ranks own contiguous neuron id ranges:
// whole columns when columns >= ranks, contiguous fractions of a single
// column otherwise.
struct PartitionMap {
    std::uint32_t n_ranks = 1;
    std::vector<std::uint32_t> range_begin; // size n_ranks + 1
    double columns_per_rank = 0.0;

    std::uint32_t begin(std::uint32_t rank) const { return range_begin[rank]; }
    std::uint32_t end(std::uint32_t rank) const { return range_begin[rank + 1]; }
    std::uint32_t owned(std::uint32_t rank) const { return end(rank) - begin(rank); }

    std::uint32_t rank_of(std::uint32_t neuron) const {
        auto it = std::upper_bound(range_begin.begin(), range_begin.end(), neuron);
        return static_cast<std::uint32_t>(it - range_begin.begin()) - 1;
    }
};

inline PartitionMap partition_columns(const Topology& topo, std::uint32_t n_ranks) {
    if (n_ranks == 0) throw std::invalid_argument("n_ranks must be >= 1");
    if (n_ranks > topo.n_neurons)
        throw std::invalid_argument("more ranks than neurons");
    const std::uint32_t cols = topo.config.columns();
    const std::uint32_t npc = topo.config.neurons_per_column;

    PartitionMap part;
    part.n_ranks = n_ranks;
    part.columns_per_rank = static_cast<double>(cols) / n_ranks;
    part.range_begin.reserve(n_ranks + 1);
    part.range_begin.push_back(0);

    if (cols >= n_ranks) {
        // Whole columns, counts differing by at most one.
        const std::uint32_t base = cols / n_ranks;
        const std::uint32_t rem = cols % n_ranks;
        std::uint32_t col = 0;
        for (std::uint32_t r = 0; r < n_ranks; ++r) {
            col += base + (r < rem ? 1 : 0);
            part.range_begin.push_back(col * npc);
        }
    } else {
        // Each column is sliced into equal contiguous neuron blocks.
        const std::uint32_t base_ranks = n_ranks / cols;
        const std::uint32_t rem_ranks = n_ranks % cols;
        for (std::uint32_t c = 0; c < cols; ++c) {
            const std::uint32_t rpc = base_ranks + (c < rem_ranks ? 1 : 0);
            const std::uint32_t col_base = c * npc;
            for (std::uint32_t k = 1; k <= rpc; ++k)
                part.range_begin.push_back(col_base + (std::uint64_t(npc) * k) / rpc);
        }
    }
    return part;
}

// Per source rank, the sorted list of destination ranks owning at least
// one target of any neuron on that rank. Self-delivery is local and
// never listed.
struct RoutingTable {
    std::vector<std::vector<std::uint32_t>> destinations; // per source rank
};

// Visits the (rank, synapse index range) slices of one source neuron's
// target-sorted span. Used both for routing construction and for
// receiver-side expansion.
template <typename Fn>
inline void for_each_target_rank(const Topology& topo, const PartitionMap& part,
                                 std::uint32_t src, Fn&& fn) {
    const std::uint64_t lo = topo.syn_offset[src];
    const std::uint64_t hi = topo.syn_offset[src + 1];
    std::uint64_t i = lo;
    while (i < hi) {
        const std::uint32_t rank = part.rank_of(topo.syn_target[i]);
        const std::uint32_t rank_end = part.end(rank);
        std::uint64_t j = i + 1;
        while (j < hi && topo.syn_target[j] < rank_end) ++j;
        fn(rank, i, j);
        i = j;
    }
}

inline RoutingTable build_routing_tables(const Topology& topo, const PartitionMap& part) {
    std::vector<std::vector<char>> reach(part.n_ranks,
                                         std::vector<char>(part.n_ranks, 0));
    for (std::uint32_t r = 0; r < part.n_ranks; ++r) {
        for (std::uint32_t src = part.begin(r); src < part.end(r); ++src) {
            for_each_target_rank(topo, part, src,
                                 [&](std::uint32_t dst, std::uint64_t, std::uint64_t) {
                                     reach[r][dst] = 1;
                                 });
        }
    }
    RoutingTable table;
    table.destinations.resize(part.n_ranks);
    for (std::uint32_t r = 0; r < part.n_ranks; ++r)
        for (std::uint32_t d = 0; d < part.n_ranks; ++d)
            if (reach[r][d] && d != r) table.destinations[r].push_back(d);
    return table;
}

} // namespace minidpsnn
