#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace minidpsnn {

// Circular store of per-step buckets. An event enqueued at `emission`
// with `delay` lands in bucket (emission + delay) mod horizon and is
// read back exactly at step emission + delay.
//
// The bucket for step t must be drained before events emitted at t are
// inserted; that ordering lets delay == horizon reuse the slot just
// freed. Pending delivery steps then occupy distinct buckets because
// the delay spread is bounded by the horizon.
template <typename Event>
class DelayQueues {
public:
    explicit DelayQueues(std::uint32_t horizon = kDelayHorizon) : buckets_(horizon) {}

    std::uint32_t horizon() const { return static_cast<std::uint32_t>(buckets_.size()); }

    void enqueue(const Event& event, std::uint64_t emission_step, std::uint32_t delay) {
        if (delay < 1 || delay > horizon())
            throw std::out_of_range("delay outside queue horizon");
        buckets_[(emission_step + delay) % horizon()].push_back(event);
    }

    // Events due at `step`, in insertion order. The bucket is emptied;
    // the returned reference stays valid until the next enqueue that
    // wraps around to it.
    std::vector<Event>& drain(std::uint64_t step) {
        auto& bucket = buckets_[step % horizon()];
        drained_.swap(bucket);
        bucket.clear();
        return drained_;
    }

private:
    std::vector<std::vector<Event>> buckets_;
    std::vector<Event> drained_;
};

} // namespace minidpsnn
