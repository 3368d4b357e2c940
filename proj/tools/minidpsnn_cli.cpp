// Benchmark driver: single runs, strong-scaling sweeps, offline energy
// analysis and report re-emission.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <minidpsnn/minidpsnn.hpp>

namespace {

using namespace minidpsnn;

struct CommonFlags {
    std::string config_path;
    std::string grid;
    std::optional<std::uint32_t> ranks_per_node;
    std::optional<double> sim_seconds;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::string send;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key=value config file");
    cmd->add_option("--grid", flags.grid, "column grid, e.g. 4x4");
    cmd->add_option("--sim-seconds", flags.sim_seconds, "simulated seconds");
    cmd->add_option("--seed", flags.seed, "RNG seed");
    cmd->add_option("--mode", flags.mode)->check(CLI::IsMember({"flat", "broker"}));
    cmd->add_option("--send", flags.send)->check(CLI::IsMember({"collective", "p2p"}));
    cmd->add_option("--ranks-per-node", flags.ranks_per_node,
                    "node grouping for broker mode (0 = one node)");
}

RunConfig resolve_config(const CommonFlags& flags) {
    RunConfig config;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw std::runtime_error("cannot read config: " + flags.config_path);
        config = apply_config(parse_config_text(in));
    }
    if (!flags.grid.empty()) {
        const auto x = flags.grid.find('x');
        if (x == std::string::npos) throw std::invalid_argument("--grid expects WxH");
        config.grid.grid_x = static_cast<std::uint32_t>(std::stoul(flags.grid.substr(0, x)));
        config.grid.grid_y =
            static_cast<std::uint32_t>(std::stoul(flags.grid.substr(x + 1)));
    }
    if (flags.sim_seconds) config.sim_seconds = *flags.sim_seconds;
    if (flags.seed) config.grid.seed = *flags.seed;
    if (flags.ranks_per_node) config.ranks_per_node = *flags.ranks_per_node;
    if (!flags.mode.empty()) config.exchange_mode = parse_exchange_mode(flags.mode);
    if (!flags.send.empty()) config.send_mode = parse_send_mode(flags.send);
    return config;
}

void attach_energy(RunReport& report, const std::string& power_log_path,
                   double baseline_watts) {
    std::ifstream in(power_log_path);
    if (!in) throw std::runtime_error("cannot read power log: " + power_log_path);
    const PowerSampleSeries series = load_power_log(in);
    report.energy = make_energy_report(series, series.t.front(), series.t.back(),
                                       report.synaptic_events, baseline_watts);
}

int cmd_run(const CommonFlags& flags, std::uint32_t ranks, const std::string& power_log,
            double baseline_watts, const std::string& out, const std::string& format,
            const std::string& raster_out, const std::string& topology_out,
            const std::string& packet_log_out) {
    RunConfig config = resolve_config(flags);
    if (ranks > 0) config.n_ranks = ranks;
    config.validate();

    const Topology topo = build_network(config.grid, config.weights);
    if (!topology_out.empty()) {
        std::ofstream os(topology_out);
        dump_topology(topo, os);
    }

    SimulationOutcome outcome = run_simulation_full(config, &topo);
    if (!power_log.empty()) attach_energy(outcome.report, power_log, baseline_watts);

    if (!raster_out.empty()) {
        std::ofstream os(raster_out);
        os << raster_text(outcome.engine.raster);
    }
    if (!packet_log_out.empty()) {
        std::ofstream os(packet_log_out);
        os << "step,src,dst,bytes\n";
        for (const auto& rec : outcome.engine.packet_log)
            os << rec.step << ',' << rec.src << ',' << rec.dst << ',' << rec.bytes << '\n';
    }

    if (!out.empty())
        emit_report(outcome.report, format, out);
    else
        std::cout << nlohmann::json(outcome.report).dump(2) << '\n';

    const auto rt = realtime_check(outcome.report);
    std::cerr << "real-time ratio " << rt.ratio << (rt.pass ? " (pass)" : " (fail)")
              << ", mean rate " << outcome.report.mean_rate_hz << " Hz, raster hash "
              << outcome.report.raster_hash << '\n';
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& ranks_csv, const std::string& out,
              const std::string& format, const std::string& plot_dir) {
    RunConfig config = resolve_config(flags);
    std::vector<std::uint32_t> ranks;
    std::stringstream ss(ranks_csv);
    for (std::string tok; std::getline(ss, tok, ',');)
        ranks.push_back(static_cast<std::uint32_t>(std::stoul(tok)));

    const ScalingReport report = strong_scaling_sweep(config, ranks);
    bool hashes_equal = true;
    for (const auto& row : report.rows)
        hashes_equal &= row.raster_hash == report.rows.front().raster_hash;
    std::cerr << "sweep rows " << report.rows.size() << ", raster hashes "
              << (hashes_equal ? "identical" : "DIVERGENT") << '\n';

    if (!plot_dir.empty()) write_plot_data(report, plot_dir);
    if (!out.empty())
        emit_report(report, format, out);
    else
        std::cout << nlohmann::json(report).dump(2) << '\n';
    return hashes_equal ? 0 : 1;
}

int cmd_energy(const std::string& power_log, double t0, double t1, std::uint64_t events,
               const std::string& report_path, double baseline_watts,
               const std::string& out) {
    std::ifstream in(power_log);
    if (!in) throw std::runtime_error("cannot read power log: " + power_log);
    const PowerSampleSeries series = load_power_log(in);
    if (t1 <= t0) {
        t0 = series.t.front();
        t1 = series.t.back();
    }
    if (!report_path.empty()) {
        std::ifstream rin(report_path);
        if (!rin) throw std::runtime_error("cannot read report: " + report_path);
        const auto report = nlohmann::json::parse(rin).get<RunReport>();
        events = report.synaptic_events;
    }
    const EnergyReport energy = make_energy_report(series, t0, t1, events, baseline_watts);
    if (!out.empty()) {
        auto os = std::ofstream(out);
        os << nlohmann::json(energy).dump(2) << '\n';
    } else {
        std::cout << nlohmann::json(energy).dump(2) << '\n';
    }
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& format,
               const std::string& out) {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot read report: " + in_path);
    const auto j = nlohmann::json::parse(in);
    if (j.contains("rows"))
        emit_report(j.get<ScalingReport>(), format, out);
    else
        emit_report(j.get<RunReport>(), format, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"miniDPSNN: distributed spiking-network proxy benchmark"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags;
    std::uint32_t run_ranks = 0;
    std::string run_power_log, run_out, run_format = "json";
    std::string run_raster_out, run_topology_out, run_packet_log_out;
    double run_baseline = 0.0;

    auto* run = app.add_subcommand("run", "single simulation");
    add_common(run, run_flags);
    run->add_option("--ranks", run_ranks, "rank (worker) count");
    run->add_option("--power-log", run_power_log, "CSV power log to fold in");
    run->add_option("--baseline-watts", run_baseline, "baseline power to subtract");
    run->add_option("--out", run_out, "report output path");
    run->add_option("--format", run_format)->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--raster-out", run_raster_out, "canonical spike raster path");
    run->add_option("--topology-out", run_topology_out, "synapse table dump path");
    run->add_option("--packet-log-out", run_packet_log_out, "per-packet CSV path");

    std::string sweep_ranks = "1,2,4,8", sweep_out, sweep_format = "json", sweep_plot_dir;
    auto* sweep = app.add_subcommand("sweep", "strong-scaling sweep");
    add_common(sweep, sweep_flags);
    sweep->add_option("--ranks", sweep_ranks, "comma-separated ascending rank counts");
    sweep->add_option("--out", sweep_out, "report output path");
    sweep->add_option("--format", sweep_format)->check(CLI::IsMember({"json", "csv"}));
    sweep->add_option("--plot-dir", sweep_plot_dir, "directory for plot-data CSVs");

    std::string energy_power_log, energy_report, energy_out;
    double energy_t0 = 0.0, energy_t1 = 0.0, energy_baseline = 0.0;
    std::uint64_t energy_events = 0;
    auto* energy = app.add_subcommand("energy", "offline power-log analysis");
    energy->add_option("--power-log", energy_power_log)->required();
    energy->add_option("--t0", energy_t0, "window start (defaults to first sample)");
    energy->add_option("--t1", energy_t1, "window end (defaults to last sample)");
    energy->add_option("--events", energy_events, "synaptic event count");
    energy->add_option("--report", energy_report, "run report JSON to take events from");
    energy->add_option("--baseline-watts", energy_baseline);
    energy->add_option("--out", energy_out);

    std::string report_in, report_format = "csv", report_out;
    auto* report = app.add_subcommand("report", "re-emit a stored report");
    report->add_option("--in", report_in)->required();
    report->add_option("--format", report_format)->check(CLI::IsMember({"json", "csv"}));
    report->add_option("--out", report_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(run_flags, run_ranks, run_power_log, run_baseline, run_out,
                           run_format, run_raster_out, run_topology_out,
                           run_packet_log_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_flags, sweep_ranks, sweep_out, sweep_format,
                             sweep_plot_dir);
        if (energy->parsed())
            return cmd_energy(energy_power_log, energy_t0, energy_t1, energy_events,
                              energy_report, energy_baseline, energy_out);
        if (report->parsed()) return cmd_report(report_in, report_format, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
