#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "delay_queue.hpp"
#include "dynamics.hpp"
#include "exchange.hpp"
#include "instrumentation.hpp"
#include "model.hpp"
#include "packet.hpp"
#include "partition.hpp"
#include "transport.hpp"

namespace minidpsnn {

enum class ExchangeMode { Flat, Broker };
enum class SendMode { Collective, PointToPoint };

struct EngineConfig {
    std::uint64_t n_steps = 1000;
    std::uint64_t seed = 1;
    LifcaParams lifca;
    ExternalStimulus stimulus;
    ExchangeMode exchange_mode = ExchangeMode::Flat;
    SendMode send_mode = SendMode::Collective;
    std::uint32_t ranks_per_node = 0; // 0 => single node
    bool log_packets = true;
};

struct EngineResult {
    std::vector<RasterEvent> raster;      // canonical (step, neuron) order
    std::vector<PacketRecord> packet_log; // sorted by (step, src, dst)
    std::vector<PhaseTimers> timers;      // per rank
    std::uint64_t spike_count = 0;
    std::uint64_t delivered_synaptic_events = 0;
    std::uint64_t external_events = 0;
    double loop_wall_seconds = 0.0; // main loop only, setup excluded
};

namespace detail {

using Clock = std::chrono::steady_clock;

struct PhaseScope {
    PhaseTimers& timers;
    Phase phase;
    Clock::time_point start = Clock::now();
    ~PhaseScope() {
        timers.add(phase, std::chrono::duration<double>(Clock::now() - start).count());
    }
};

struct SynapticEvent {
    std::uint32_t local_target;
    float weight;
};

// One rank's whole simulation. Shares the immutable topology; all
// cross-rank interaction goes through the transport.
class RankWorker {
public:
    RankWorker(std::uint32_t rank, const Topology& topo, const PartitionMap& part,
               const RoutingTable& routing, const EngineConfig& cfg, Transport& transport)
        : rank_(rank), topo_(topo), part_(part), cfg_(cfg), transport_(transport),
          nodes_(part.n_ranks, cfg.ranks_per_node == 0 ? part.n_ranks : cfg.ranks_per_node),
          routes_(routing.destinations[rank]), base_(part.begin(rank)),
          n_local_(part.owned(rank)) {
        v_.assign(n_local_, cfg_.lifca.v_rest);
        c_.assign(n_local_, 0.0);
        refractory_until_.assign(n_local_, 0);
        input_.assign(n_local_, 0.0);
        per_dst_spikes_.resize(part_.n_ranks);
        is_broker_ = cfg_.exchange_mode == ExchangeMode::Broker &&
                     nodes_.broker_of(nodes_.node_of(rank_)) == rank_;
    }

    void run() {
        const auto loop_start = Clock::now();
        const double mean_ext = cfg_.stimulus.mean_events_per_step(cfg_.lifca.dt);
        const double p0_ext = std::exp(-mean_ext);
        const float w_ext = cfg_.stimulus.weight_mv;

        for (std::uint64_t step = 0; step < cfg_.n_steps; ++step) {
            // -- memory management: drain due events into input sums
            {
                PhaseScope scope{timers_, Phase::MemoryManagement};
                auto& due = queues_.drain(step);
                for (const auto& ev : due) input_[ev.local_target] += ev.weight;
            }

            // -- computation: external drive + neuron updates
            own_spikes_.clear();
            {
                PhaseScope scope{timers_, Phase::Computation};
                for (std::uint32_t ln = 0; ln < n_local_; ++ln) {
                    const std::uint32_t gid = base_ + ln;
                    std::uint32_t ext = 0;
                    if (mean_ext > 0.0) {
                        CounterRng rng(cfg_.seed, rng_stream::external_drive, gid, step);
                        ext = rng.poisson(mean_ext, p0_ext);
                    }
                    external_events_ += ext;
                    const double current = input_[ln] + double(ext) * w_ext;
                    input_[ln] = 0.0;
                    LifcaState state{v_[ln], c_[ln], refractory_until_[ln]};
                    const bool spiked = step_lifca(state, cfg_.lifca, current, step);
                    v_[ln] = state.v;
                    c_[ln] = state.c;
                    refractory_until_[ln] = state.refractory_until;
                    if (spiked) {
                        own_spikes_.push_back(gid);
                        raster_.push_back({static_cast<std::uint32_t>(step), gid});
                    }
                }
            }

            // -- communication: route, pack, send
            {
                PhaseScope scope{timers_, Phase::Communication};
                send_spikes(step);
            }
            sync_barrier();

            if (cfg_.exchange_mode == ExchangeMode::Broker) {
                {
                    PhaseScope scope{timers_, Phase::Communication};
                    if (is_broker_) broker_forward(step);
                }
                sync_barrier();
                {
                    PhaseScope scope{timers_, Phase::Communication};
                    if (is_broker_) broker_scatter();
                }
                sync_barrier();
            }

            // -- communication: receive and unpack
            remote_spikes_.clear();
            {
                PhaseScope scope{timers_, Phase::Communication};
                receive_spikes(step);
            }

            // -- memory management: expand into delay queues
            {
                PhaseScope scope{timers_, Phase::MemoryManagement};
                expand_and_enqueue(step);
            }
            sync_barrier();
        }
        timers_.loop_seconds =
            std::chrono::duration<double>(Clock::now() - loop_start).count();
    }

    PhaseTimers timers_;
    std::vector<RasterEvent> raster_;
    std::vector<PacketRecord> packet_log_;
    std::uint64_t delivered_events_ = 0;
    std::uint64_t external_events_ = 0;

private:
    void sync_barrier() {
        PhaseScope scope{timers_, Phase::Synchronization};
        transport_.barrier();
    }

    void log_packet(std::uint64_t step, std::uint32_t src, std::uint32_t dst,
                    std::size_t bytes, bool inter_node) {
        if (cfg_.log_packets)
            packet_log_.push_back({step, src, dst, static_cast<std::uint32_t>(bytes),
                                   inter_node});
    }

    // Distributes this step's own spikes: direct sends to intra-node (or
    // flat-mode) destinations, broker envelopes for foreign nodes.
    void send_spikes(std::uint64_t step) {
        for (auto dst : routes_) per_dst_spikes_[dst].clear();
        for (std::uint32_t gid : own_spikes_) {
            for_each_target_rank(topo_, part_, gid,
                                 [&](std::uint32_t dst, std::uint64_t, std::uint64_t) {
                                     if (dst != rank_)
                                         per_dst_spikes_[dst].push_back(
                                             {gid, static_cast<std::uint32_t>(step)});
                                 });
        }

        std::vector<EnvelopeEntry> foreign;
        const bool broker = cfg_.exchange_mode == ExchangeMode::Broker;
        for (auto dst : routes_) {
            const auto& spikes = per_dst_spikes_[dst];
            if (spikes.empty() && cfg_.send_mode == SendMode::PointToPoint) continue;
            auto packets = pack_packets(static_cast<std::uint32_t>(step), spikes);
            const bool cross_node = !nodes_.same_node(rank_, dst);
            for (auto& packet : packets) {
                if (broker && cross_node) {
                    foreign.push_back({dst, std::move(packet)});
                } else {
                    log_packet(step, rank_, dst, packet.size(), !broker && cross_node);
                    transport_.send(rank_, dst,
                                    {rank_, MessageKind::SpikePayload, std::move(packet)});
                }
            }
        }

        if (broker) {
            const std::uint32_t my_broker = nodes_.broker_of(nodes_.node_of(rank_));
            if (is_broker_) {
                own_foreign_ = std::move(foreign);
            } else if (!foreign.empty()) {
                for (const auto& e : foreign)
                    log_packet(step, rank_, my_broker, e.packet.size(), false);
                transport_.send(rank_, my_broker,
                                {rank_, MessageKind::BrokerEnvelope,
                                 encode_envelope(foreign)});
            }
        }
    }

    // Broker step 1: merge the node's outbound entries and send one
    // message per destination node.
    void broker_forward(std::uint64_t step) {
        std::vector<EnvelopeEntry> entries = std::move(own_foreign_);
        own_foreign_.clear();
        stashed_.clear();
        for (auto& msg : transport_.receive_all(rank_)) {
            if (msg.kind == MessageKind::BrokerEnvelope) {
                auto decoded = decode_envelope(msg.bytes);
                entries.insert(entries.end(), std::make_move_iterator(decoded.begin()),
                               std::make_move_iterator(decoded.end()));
            } else if (msg.kind == MessageKind::BrokerTransfer) {
                // A peer broker running ahead in the same phase.
                pending_transfers_.push_back(std::move(msg));
            } else {
                stashed_.push_back(std::move(msg)); // direct packets for me-as-rank
            }
        }
        auto by_node = broker_route(nodes_, nodes_.node_of(rank_), entries);
        for (std::uint32_t node = 0; node < nodes_.n_nodes(); ++node) {
            if (node == nodes_.node_of(rank_)) continue;
            auto it = std::find_if(by_node.begin(), by_node.end(),
                                   [&](const auto& p) { return p.first == node; });
            const bool have = it != by_node.end();
            if (!have && cfg_.send_mode == SendMode::PointToPoint) continue;
            std::vector<std::uint8_t> bytes = have ? std::move(it->second)
                                                   : std::vector<std::uint8_t>{};
            const std::uint32_t peer = nodes_.broker_of(node);
            log_packet(step, rank_, peer, bytes.size(), true);
            transport_.send(rank_, peer,
                            {rank_, MessageKind::BrokerTransfer, std::move(bytes)});
        }
    }

    // Broker step 2: unpack inbound inter-node envelopes and hand each
    // contained packet to its final rank.
    void broker_scatter() {
        auto transfers = std::move(pending_transfers_);
        pending_transfers_.clear();
        for (auto& msg : transport_.receive_all(rank_)) {
            if (msg.kind == MessageKind::BrokerTransfer)
                transfers.push_back(std::move(msg));
            else
                stashed_.push_back(std::move(msg));
        }
        for (auto& msg : transfers)
            for (auto& entry : decode_envelope(msg.bytes))
                transport_.send(rank_, entry.dst_rank,
                                {rank_, MessageKind::SpikePayload, std::move(entry.packet)});
    }

    void receive_spikes(std::uint64_t step) {
        auto handle = [&](Message& msg) {
            auto unpacked = unpack_packet(msg.bytes);
            if (unpacked.step != step)
                throw std::runtime_error("step skew: packet from a different step");
            remote_spikes_.insert(remote_spikes_.end(), unpacked.spikes.begin(),
                                  unpacked.spikes.end());
        };
        for (auto& msg : stashed_) handle(msg);
        stashed_.clear();
        for (auto& msg : transport_.receive_all(rank_)) handle(msg);
    }

    // Expansion in ascending source-id order keeps delay-queue contents
    // (and therefore input sums) identical across partitionings.
    void expand_and_enqueue(std::uint64_t step) {
        expand_sources_.clear();
        for (std::uint32_t gid : own_spikes_) expand_sources_.push_back(gid);
        for (const auto& s : remote_spikes_) expand_sources_.push_back(s.source);
        std::sort(expand_sources_.begin(), expand_sources_.end());

        const std::uint32_t local_end = part_.end(rank_);
        for (std::uint32_t src : expand_sources_) {
            const std::uint64_t lo = topo_.syn_offset[src];
            const std::uint64_t hi = topo_.syn_offset[src + 1];
            auto first = std::lower_bound(topo_.syn_target.begin() + lo,
                                          topo_.syn_target.begin() + hi, base_);
            for (std::uint64_t i = first - topo_.syn_target.begin();
                 i < hi && topo_.syn_target[i] < local_end; ++i) {
                queues_.enqueue({topo_.syn_target[i] - base_, topo_.syn_weight[i]}, step,
                                topo_.syn_delay[i]);
                ++delivered_events_;
            }
        }
    }

    std::uint32_t rank_;
    const Topology& topo_;
    const PartitionMap& part_;
    const EngineConfig& cfg_;
    Transport& transport_;
    NodeMap nodes_;
    std::vector<std::uint32_t> routes_;
    std::uint32_t base_;
    std::uint32_t n_local_;
    bool is_broker_ = false;

    std::vector<double> v_, c_, input_;
    std::vector<std::uint64_t> refractory_until_;
    DelayQueues<SynapticEvent> queues_;
    std::vector<std::uint32_t> own_spikes_;
    std::vector<AxonalSpike> remote_spikes_;
    std::vector<std::uint32_t> expand_sources_;
    std::vector<std::vector<AxonalSpike>> per_dst_spikes_;
    std::vector<EnvelopeEntry> own_foreign_;
    std::vector<Message> stashed_;
    std::vector<Message> pending_transfers_;
};

} // namespace detail

inline EngineResult run_engine(const Topology& topo, const PartitionMap& part,
                               const RoutingTable& routing, const EngineConfig& cfg,
                               Transport& transport) {
    cfg.lifca.validate();
    cfg.stimulus.validate();
    if (transport.n_ranks() != part.n_ranks)
        throw std::invalid_argument("transport and partition disagree on rank count");
    if (topo.config.delay_max > kDelayHorizon)
        throw std::invalid_argument("delays exceed the queue horizon");

    std::vector<std::unique_ptr<detail::RankWorker>> workers;
    workers.reserve(part.n_ranks);
    for (std::uint32_t r = 0; r < part.n_ranks; ++r)
        workers.push_back(std::make_unique<detail::RankWorker>(r, topo, part, routing, cfg,
                                                               transport));

    std::vector<std::exception_ptr> errors(part.n_ranks);
    const auto start = detail::Clock::now();
    {
        std::vector<std::jthread> threads;
        threads.reserve(part.n_ranks);
        for (std::uint32_t r = 0; r < part.n_ranks; ++r) {
            threads.emplace_back([&, r] {
                try {
                    workers[r]->run();
                } catch (...) {
                    errors[r] = std::current_exception();
                    transport.drop_out();
                }
            });
        }
    }
    const double wall =
        std::chrono::duration<double>(detail::Clock::now() - start).count();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);

    EngineResult result;
    result.loop_wall_seconds = wall;
    for (auto& w : workers) {
        result.raster.insert(result.raster.end(), w->raster_.begin(), w->raster_.end());
        result.packet_log.insert(result.packet_log.end(), w->packet_log_.begin(),
                                 w->packet_log_.end());
        result.timers.push_back(w->timers_);
        result.delivered_synaptic_events += w->delivered_events_;
        result.external_events += w->external_events_;
    }
    std::sort(result.raster.begin(), result.raster.end());
    std::sort(result.packet_log.begin(), result.packet_log.end(),
              [](const PacketRecord& a, const PacketRecord& b) {
                  return std::tie(a.step, a.src, a.dst) < std::tie(b.step, b.src, b.dst);
              });
    result.spike_count = result.raster.size();
    return result;
}

} // namespace minidpsnn
