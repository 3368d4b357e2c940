#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "packet.hpp"

namespace minidpsnn {

// Rank -> node grouping for the two-level broker hierarchy. The lowest
// rank of each node doubles as the node's broker.
struct NodeMap {
    std::uint32_t n_ranks = 1;
    std::uint32_t ranks_per_node = 1;

    NodeMap() = default;
    NodeMap(std::uint32_t ranks, std::uint32_t per_node)
        : n_ranks(ranks), ranks_per_node(per_node == 0 ? ranks : per_node) {
        if (n_ranks == 0 || ranks_per_node == 0)
            throw std::invalid_argument("node map needs ranks >= 1");
    }

    std::uint32_t node_of(std::uint32_t rank) const { return rank / ranks_per_node; }
    std::uint32_t n_nodes() const { return (n_ranks + ranks_per_node - 1) / ranks_per_node; }
    std::uint32_t broker_of(std::uint32_t node) const { return node * ranks_per_node; }
    bool same_node(std::uint32_t a, std::uint32_t b) const {
        return node_of(a) == node_of(b);
    }
};

// Broker envelope: SpikePackets bound for ranks of one destination
// node, gathered into a single inter-node message.
//   repeated [ u32 dst_rank | u32 packet_len | packet bytes ]   (little-endian)
struct EnvelopeEntry {
    std::uint32_t dst_rank = 0;
    std::vector<std::uint8_t> packet;
};

inline std::vector<std::uint8_t> encode_envelope(std::span<const EnvelopeEntry> entries) {
    std::vector<std::uint8_t> bytes;
    for (const auto& e : entries) {
        detail::put_u32(bytes, e.dst_rank);
        detail::put_u32(bytes, static_cast<std::uint32_t>(e.packet.size()));
        bytes.insert(bytes.end(), e.packet.begin(), e.packet.end());
    }
    return bytes;
}

inline std::vector<EnvelopeEntry> decode_envelope(std::span<const std::uint8_t> bytes) {
    std::vector<EnvelopeEntry> entries;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 8)
            throw PacketError(PacketFault::LengthMismatch, "truncated envelope entry");
        EnvelopeEntry e;
        e.dst_rank = detail::get_u32(bytes.data() + pos);
        const std::uint32_t len = detail::get_u32(bytes.data() + pos + 4);
        pos += 8;
        if (bytes.size() - pos < len)
            throw PacketError(PacketFault::LengthMismatch, "truncated envelope packet");
        e.packet.assign(bytes.begin() + pos, bytes.begin() + pos + len);
        pos += len;
        entries.push_back(std::move(e));
    }
    return entries;
}

// Groups per-destination-rank packets into one envelope per foreign
// node. Intra-node destinations are rejected; those go rank-to-rank.
inline std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> broker_route(
    const NodeMap& nodes, std::uint32_t src_node,
    std::span<const EnvelopeEntry> foreign_entries) {
    std::vector<std::vector<EnvelopeEntry>> by_node(nodes.n_nodes());
    for (const auto& e : foreign_entries) {
        const std::uint32_t dst_node = nodes.node_of(e.dst_rank);
        if (dst_node == src_node)
            throw std::invalid_argument("broker_route given an intra-node destination");
        by_node[dst_node].push_back(e);
    }
    std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> out;
    for (std::uint32_t node = 0; node < nodes.n_nodes(); ++node)
        if (!by_node[node].empty())
            out.emplace_back(node, encode_envelope(by_node[node]));
    return out;
}

} // namespace minidpsnn
