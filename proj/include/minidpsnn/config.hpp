#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dynamics.hpp"
#include "engine.hpp"
#include "model.hpp"

namespace minidpsnn {

// Everything a single run needs. Flags override file values; the file
// format is flat key=value lines under [section] headers.
struct RunConfig {
    GridConfig grid;
    LifcaParams lifca;
    ExternalStimulus stimulus;
    SynapseWeights weights;
    std::uint32_t n_ranks = 1;
    std::uint32_t ranks_per_node = 0; // 0 => all ranks on one node
    ExchangeMode exchange_mode = ExchangeMode::Flat;
    SendMode send_mode = SendMode::Collective;
    double sim_seconds = 1.0;

    std::uint64_t n_steps() const {
        return static_cast<std::uint64_t>(std::llround(sim_seconds * 1000.0 / lifca.dt));
    }

    void validate() const {
        grid.validate();
        lifca.validate();
        stimulus.validate();
        if (sim_seconds <= 0.0) throw std::invalid_argument("sim_seconds must be > 0");
        if (n_ranks < 1) throw std::invalid_argument("n_ranks must be >= 1");
    }

    EngineConfig engine_config() const {
        EngineConfig ec;
        ec.n_steps = n_steps();
        ec.seed = grid.seed;
        ec.lifca = lifca;
        ec.stimulus = stimulus;
        ec.exchange_mode = exchange_mode;
        ec.send_mode = send_mode;
        ec.ranks_per_node = ranks_per_node;
        return ec;
    }
};

using ConfigMap = std::map<std::string, std::string>;

// Parses `[section]` / `key=value` text into "section.key" entries.
// '#' starts a comment; blank lines are skipped.
inline ConfigMap parse_config_text(std::istream& in) {
    ConfigMap values;
    std::string line, section;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        values[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return values;
}

namespace detail {
template <typename T>
inline void read_value(const ConfigMap& m, const std::string& key, T& out) {
    auto it = m.find(key);
    if (it == m.end()) return;
    std::istringstream ss(it->second);
    T v;
    if (!(ss >> v)) throw std::invalid_argument("config value for " + key + " unparsable");
    out = v;
}
inline void read_value(const ConfigMap& m, const std::string& key, std::string& out) {
    auto it = m.find(key);
    if (it != m.end()) out = it->second;
}
} // namespace detail

inline ExchangeMode parse_exchange_mode(const std::string& s) {
    if (s == "flat") return ExchangeMode::Flat;
    if (s == "broker") return ExchangeMode::Broker;
    throw std::invalid_argument("mode must be flat or broker");
}

inline SendMode parse_send_mode(const std::string& s) {
    if (s == "collective") return SendMode::Collective;
    if (s == "p2p") return SendMode::PointToPoint;
    throw std::invalid_argument("send must be collective or p2p");
}

inline RemoteKernel parse_remote_kernel(const std::string& s) {
    if (s == "moore-uniform") return RemoteKernel::MooreUniform;
    if (s == "gaussian") return RemoteKernel::Gaussian;
    throw std::invalid_argument("remote_kernel must be moore-uniform or gaussian");
}

inline RunConfig apply_config(const ConfigMap& m, RunConfig base = {}) {
    RunConfig c = base;
    detail::read_value(m, "grid.grid_x", c.grid.grid_x);
    detail::read_value(m, "grid.grid_y", c.grid.grid_y);
    detail::read_value(m, "grid.neurons_per_column", c.grid.neurons_per_column);
    detail::read_value(m, "grid.excitatory_fraction", c.grid.excitatory_fraction);
    detail::read_value(m, "grid.out_degree_exc", c.grid.out_degree_exc);
    detail::read_value(m, "grid.out_degree_inh", c.grid.out_degree_inh);
    detail::read_value(m, "grid.intra_fraction", c.grid.intra_fraction);
    detail::read_value(m, "grid.kernel_sigma", c.grid.kernel_sigma);
    detail::read_value(m, "grid.delay_min", c.grid.delay_min);
    detail::read_value(m, "grid.delay_max", c.grid.delay_max);
    std::string kernel;
    detail::read_value(m, "grid.remote_kernel", kernel);
    if (!kernel.empty()) c.grid.remote_kernel = parse_remote_kernel(kernel);

    detail::read_value(m, "lifca.tau_m", c.lifca.tau_m);
    detail::read_value(m, "lifca.v_rest", c.lifca.v_rest);
    detail::read_value(m, "lifca.v_reset", c.lifca.v_reset);
    detail::read_value(m, "lifca.v_threshold", c.lifca.v_threshold);
    detail::read_value(m, "lifca.tau_arp", c.lifca.tau_arp);
    detail::read_value(m, "lifca.g_c", c.lifca.g_c);
    detail::read_value(m, "lifca.tau_c", c.lifca.tau_c);
    detail::read_value(m, "lifca.alpha_c", c.lifca.alpha_c);
    detail::read_value(m, "lifca.dt", c.lifca.dt);

    detail::read_value(m, "stimulus.equivalent_synapses", c.stimulus.equivalent_synapses);
    detail::read_value(m, "stimulus.rate_hz", c.stimulus.rate_hz);
    detail::read_value(m, "stimulus.weight_mv", c.stimulus.weight_mv);

    detail::read_value(m, "weights.excitatory_mv", c.weights.excitatory_mv);
    detail::read_value(m, "weights.inhibitory_mv", c.weights.inhibitory_mv);

    detail::read_value(m, "run.ranks", c.n_ranks);
    detail::read_value(m, "run.ranks_per_node", c.ranks_per_node);
    detail::read_value(m, "run.sim_seconds", c.sim_seconds);
    detail::read_value(m, "run.seed", c.grid.seed);
    std::string mode, send;
    detail::read_value(m, "run.mode", mode);
    if (!mode.empty()) c.exchange_mode = parse_exchange_mode(mode);
    detail::read_value(m, "run.send", send);
    if (!send.empty()) c.send_mode = parse_send_mode(send);
    return c;
}

} // namespace minidpsnn
