#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "rng.hpp"

namespace minidpsnn {

// Leaky integrate-and-fire with a calcium-gated adaptation current,
// explicit Euler at dt. Potentials are rest-relative millivolts.
struct LifcaParams {
    double tau_m = 20.0;       // ms
    double v_rest = 0.0;       // mV
    double v_reset = 0.0;      // mV
    double v_threshold = 20.0; // mV
    double tau_arp = 2.0;      // ms, absolute refractory period
    double g_c = 0.02;         // mV/ms per unit calcium
    double tau_c = 500.0;      // ms
    double alpha_c = 1.0;      // calcium increment per spike
    double dt = 1.0;           // ms

    void validate() const {
        if (tau_m <= 0.0 || tau_c <= 0.0 || dt <= 0.0)
            throw std::invalid_argument("time constants and dt must be positive");
        if (v_threshold <= v_reset)
            throw std::invalid_argument("v_threshold must exceed v_reset");
    }

    std::uint32_t refractory_steps() const {
        return static_cast<std::uint32_t>(std::lround(tau_arp / dt));
    }
};

struct LifcaState {
    double v = 0.0;
    double c = 0.0;
    std::uint64_t refractory_until = 0; // step index; active while now < this
};

// One Euler step. input_current is the summed synaptic + external
// increment for this step, in mV.
inline bool step_lifca(LifcaState& state, const LifcaParams& p, double input_current,
                       std::uint64_t now) {
    if (!std::isfinite(input_current))
        throw std::invalid_argument("non-finite input current");
    const double c_decay = 1.0 - p.dt / p.tau_c;
    if (now < state.refractory_until) {
        state.v = p.v_reset;
        state.c *= c_decay;
        return false;
    }
    state.v += p.dt * (-(state.v - p.v_rest) / p.tau_m - p.g_c * state.c) + input_current;
    state.c *= c_decay;
    if (state.v >= p.v_threshold) {
        state.v = p.v_reset;
        state.c += p.alpha_c;
        state.refractory_until = now + p.refractory_steps();
        return true;
    }
    return false;
}

// External Poisson drive: a population of equivalent synapses per
// neuron, each firing at `rate_hz`.
struct ExternalStimulus {
    std::uint32_t equivalent_synapses = 594;
    double rate_hz = 3.0;
    float weight_mv = 0.48f; // bisected so the reference network sits near 5 Hz

    void validate() const {
        if (rate_hz < 0.0) throw std::invalid_argument("rate must be >= 0");
    }

    double mean_events_per_step(double dt_ms) const {
        return equivalent_synapses * rate_hz * dt_ms * 1e-3;
    }
};

// Event count for one neuron at one step; keyed draw, so the result is
// independent of partitioning and reproducible on repeated calls.
inline std::uint32_t external_poisson_events(std::uint32_t neuron_id, std::uint64_t step,
                                             const ExternalStimulus& stimulus,
                                             std::uint64_t seed, double dt_ms = 1.0) {
    const double mean = stimulus.mean_events_per_step(dt_ms);
    if (mean <= 0.0) return 0;
    CounterRng rng(seed, rng_stream::external_drive, neuron_id, step);
    return rng.poisson(mean);
}

// Sum of due synaptic weights plus external events.
inline double accumulate_input(std::span<const float> synaptic_weights,
                               std::uint32_t stimulus_events, float external_weight_mv) {
    double total = 0.0;
    for (float w : synaptic_weights) total += w;
    return total + static_cast<double>(stimulus_events) * external_weight_mv;
}

} // namespace minidpsnn
