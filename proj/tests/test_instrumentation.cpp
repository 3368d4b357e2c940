#include <catch_amalgamated.hpp>

#include <minidpsnn/instrumentation.hpp>

#include <sstream>

using namespace minidpsnn;

TEST_CASE("phase rows compute exact fractions from synthetic timers") {
    PhaseTimers t;
    t.add(Phase::Computation, 0.2);
    t.add(Phase::MemoryManagement, 0.1);
    t.add(Phase::Communication, 0.5);
    t.add(Phase::Synchronization, 0.15);
    t.loop_seconds = 1.0;

    const auto row = phase_row(t);
    REQUIRE(row.fraction[0] == Catch::Approx(0.2));
    REQUIRE(row.fraction[1] == Catch::Approx(0.1));
    REQUIRE(row.fraction[2] == Catch::Approx(0.5));
    REQUIRE(row.fraction[3] == Catch::Approx(0.15));
    REQUIRE(row.residual_fraction == Catch::Approx(0.05));
}

TEST_CASE("all time in one phase gives fraction 1") {
    PhaseTimers t;
    t.add(Phase::Communication, 2.0);
    t.loop_seconds = 2.0;
    const auto row = phase_row(t);
    REQUIRE(row.fraction[2] == Catch::Approx(1.0));
    REQUIRE(row.fraction[0] == 0.0);
    REQUIRE(row.residual_fraction == Catch::Approx(0.0));
}

TEST_CASE("the report schema carries a published-style fraction row") {
    // 12x12 benchmark row shape: 21.3 / 17.1 / 35.2 / 22.9 percent
    PhaseTimers t;
    t.add(Phase::Computation, 0.213);
    t.add(Phase::MemoryManagement, 0.171);
    t.add(Phase::Communication, 0.352);
    t.add(Phase::Synchronization, 0.229);
    t.loop_seconds = 1.0;

    const auto report = phase_report({t});
    double sum = report.aggregate.residual_fraction;
    for (double f : report.aggregate.fraction) sum += f;
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(report.aggregate.residual_fraction < 0.05);
}

TEST_CASE("phase reports demand recorded samples") {
    REQUIRE_THROWS_AS(phase_report({}), std::invalid_argument);
    PhaseTimers empty;
    REQUIRE_THROWS_AS(phase_row(empty), std::invalid_argument);
}

TEST_CASE("traffic summary") {
    SECTION("no packets means all zeros") {
        const auto stats = traffic_summary({}, 2);
        REQUIRE(stats.aggregate.packets == 0);
        REQUIRE(stats.aggregate.payload_bytes == 0);
        REQUIRE(stats.aggregate.mean_packet_bytes == 0.0);
    }

    SECTION("sizes 40, 40, 512 give mean 197.33 and max 512") {
        std::vector<PacketRecord> log = {
            {0, 0, 1, 40, false}, {1, 0, 1, 40, false}, {2, 1, 0, 512, false}};
        const auto stats = traffic_summary(log, 2);
        REQUIRE(stats.aggregate.packets == 3);
        REQUIRE(stats.aggregate.max_packet_bytes == 512);
        REQUIRE(stats.aggregate.mean_packet_bytes == Catch::Approx(197.333).margin(0.01));
        REQUIRE(stats.per_rank[0].packets == 2);
        REQUIRE(stats.per_rank[1].payload_bytes == 512);
    }

    SECTION("streaming aggregation equals an independent rescan") {
        std::vector<PacketRecord> log;
        for (std::uint32_t i = 0; i < 500; ++i)
            log.push_back({i, i % 3, (i + 1) % 3, 8 + 8 * (i % 20), false});
        const auto stats = traffic_summary(log, 3);

        std::uint64_t packets = 0, payload = 0;
        std::uint32_t max_bytes = 0;
        for (const auto& rec : log) {
            packets += 1;
            payload += rec.bytes;
            max_bytes = std::max(max_bytes, rec.bytes);
        }
        REQUIRE(stats.aggregate.packets == packets);
        REQUIRE(stats.aggregate.payload_bytes == payload);
        REQUIRE(stats.aggregate.max_packet_bytes == max_bytes);
        REQUIRE(stats.aggregate.mean_packet_bytes ==
                Catch::Approx(double(payload) / packets));
        REQUIRE(stats.aggregate.mean_packet_bytes <= stats.aggregate.max_packet_bytes);
    }
}

TEST_CASE("inter-node stream counting is per step and per ordered pair") {
    std::vector<PacketRecord> log = {
        {3, 0, 4, 8, true},  {3, 0, 4, 16, true}, // same stream twice
        {3, 1, 4, 8, true},  {3, 4, 0, 8, true},
        {3, 1, 2, 8, false},                      // intra-node
        {4, 0, 4, 8, true},                       // different step
    };
    REQUIRE(inter_node_stream_count(log, 3) == 3);
    REQUIRE(inter_node_stream_count(log, 4) == 1);
    REQUIRE(inter_node_stream_count(log, 5) == 0);
}

TEST_CASE("power sample series validates its inputs") {
    PowerSampleSeries s;
    s.append(0.0, 10.0);
    REQUIRE_THROWS_AS(s.append(0.0, 11.0), std::invalid_argument);
    REQUIRE_THROWS_AS(s.append(1.0, -1.0), std::invalid_argument);
    s.append(1.0, 12.0);
    REQUIRE(s.t.size() == 2);
}

TEST_CASE("power logs load in both CSV schemas") {
    SECTION("t,p with header and comments") {
        std::istringstream in("# run 12\n t,watts\n0,253\n9.1,253\n");
        const auto s = load_power_log(in);
        REQUIRE(s.t == std::vector<double>{0.0, 9.1});
        REQUIRE(s.p == std::vector<double>{253.0, 253.0});
    }
    SECTION("t,i,v multiplies out the power") {
        std::istringstream in("0,1.15,220\n30,1.15,220\n");
        const auto s = load_power_log(in);
        REQUIRE(s.p[0] == Catch::Approx(253.0));
    }
    SECTION("empty log is an error") {
        std::istringstream in("# nothing here\n");
        REQUIRE_THROWS_AS(load_power_log(in), std::invalid_argument);
    }
}

TEST_CASE("energy integration") {
    SECTION("constant 253 W over 9.1 s is 2302 J") {
        PowerSampleSeries s;
        s.append(0.0, 253.0);
        s.append(9.1, 253.0);
        REQUIRE(integrate_energy(s, 0.0, 9.1) == Catch::Approx(2302.3).epsilon(1e-9));
    }
    SECTION("constant 17.6 W over 30 s is 528 J") {
        PowerSampleSeries s;
        s.append(0.0, 17.6);
        s.append(30.0, 17.6);
        REQUIRE(integrate_energy(s, 0.0, 30.0) == Catch::Approx(528.0).epsilon(1e-9));
    }
    SECTION("linear ramp 0 to 100 W over 10 s is the triangle area") {
        PowerSampleSeries s;
        s.append(0.0, 0.0);
        s.append(10.0, 100.0);
        REQUIRE(integrate_energy(s, 0.0, 10.0) == Catch::Approx(500.0).epsilon(1e-9));
    }
    SECTION("trapezoid is exact on piecewise-linear series, sub-windows included") {
        PowerSampleSeries s;
        s.append(0.0, 0.0);
        s.append(2.0, 40.0);
        s.append(5.0, 40.0);
        s.append(10.0, 0.0);
        // closed-form: 40 + 120 + 100
        REQUIRE(integrate_energy(s, 0.0, 10.0) == Catch::Approx(260.0).epsilon(1e-9));
        // interior window with interpolated boundaries: [1, 7]
        // = 0.5*(20+40)*1 + 120 + 0.5*(40+24)*2
        REQUIRE(integrate_energy(s, 1.0, 7.0) == Catch::Approx(214.0).epsilon(1e-9));
    }
    SECTION("window and sample validation") {
        PowerSampleSeries s;
        s.append(0.0, 1.0);
        REQUIRE_THROWS_AS(integrate_energy(s, 0.0, 1.0), std::invalid_argument);
        s.append(5.0, 1.0);
        REQUIRE_THROWS_AS(integrate_energy(s, 3.0, 3.0), std::invalid_argument);
        REQUIRE_THROWS_AS(integrate_energy(s, -1.0, 4.0), std::invalid_argument);
        REQUIRE_THROWS_AS(integrate_energy(s, 0.0, 6.0), std::invalid_argument);
    }
}

TEST_CASE("per-event energy") {
    REQUIRE(per_event_energy(528.0, 235000000) == Catch::Approx(2.2468).margin(0.001));
    REQUIRE(per_event_energy(2302.3, 235000000) == Catch::Approx(9.797).margin(0.001));
    REQUIRE(per_event_energy(0.0, 10) == 0.0);
    REQUIRE_THROWS_AS(per_event_energy(1.0, 0), std::invalid_argument);
}

TEST_CASE("energy report ties its fields together") {
    PowerSampleSeries s;
    s.append(0.0, 100.0);
    s.append(10.0, 100.0);
    const auto rep = make_energy_report(s, 0.0, 10.0, 1000000, 20.0);
    REQUIRE(rep.joules == Catch::Approx(800.0)); // baseline subtracted
    REQUIRE(rep.mean_watts == Catch::Approx(80.0));
    REQUIRE(rep.microjoules_per_event == Catch::Approx(800.0));
    REQUIRE(rep.joules == Catch::Approx(rep.mean_watts * rep.wall_seconds));
}

TEST_CASE("synaptic event counting") {
    GridConfig cfg;
    cfg.grid_x = 1;
    cfg.grid_y = 1;
    cfg.neurons_per_column = 10;
    cfg.excitatory_fraction = 0.8;
    cfg.out_degree_exc = 4;
    cfg.out_degree_inh = 3;
    cfg.seed = 3;
    const Topology topo = build_network(cfg);

    ExternalStimulus quiet;
    quiet.rate_hz = 0.0;

    SECTION("no spikes and no drive count zero") {
        REQUIRE(count_synaptic_events({}, topo, quiet, 5, 3) == 0);
    }

    SECTION("ten-neuron fixture equals hand enumeration") {
        // neurons 0..7 excitatory (degree 4), 8..9 inhibitory (degree 3)
        const std::vector<RasterEvent> raster = {{0, 0}, {0, 8}, {1, 3}, {2, 9}, {2, 9}};
        REQUIRE(count_synaptic_events(raster, topo, quiet, 5, 3) == 4 + 3 + 4 + 3 + 3);
    }

    SECTION("external events add the keyed Poisson totals") {
        ExternalStimulus stim;
        std::uint64_t external = 0;
        for (std::uint32_t n = 0; n < topo.n_neurons; ++n)
            for (std::uint64_t s = 0; s < 5; ++s)
                external += external_poisson_events(n, s, stim, 3);
        REQUIRE(count_synaptic_events({{0, 0}}, topo, stim, 5, 3) == 4 + external);
    }
}

TEST_CASE("closed-form event arithmetic reproduces the published total") {
    const double total = expected_synaptic_events(1e4, 5.1, 3.0, 1195.0, 594.0, 3.0);
    REQUIRE(total == Catch::Approx(236295000.0));
    REQUIRE(std::abs(total - 235e6) / 235e6 < 0.01);
}
