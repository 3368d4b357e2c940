#include <catch_amalgamated.hpp>

#include <minidpsnn/partition.hpp>

#include <set>

using namespace minidpsnn;

namespace {

GridConfig small_grid(std::uint32_t gx, std::uint32_t gy, std::uint32_t npc = 100) {
    GridConfig cfg;
    cfg.grid_x = gx;
    cfg.grid_y = gy;
    cfg.neurons_per_column = npc;
    cfg.out_degree_exc = 50;
    cfg.out_degree_inh = 40;
    cfg.seed = 13;
    return cfg;
}

void check_cover(const PartitionMap& part, std::uint32_t n_neurons) {
    REQUIRE(part.range_begin.front() == 0);
    REQUIRE(part.range_begin.back() == n_neurons);
    for (std::uint32_t r = 0; r < part.n_ranks; ++r) {
        REQUIRE(part.begin(r) <= part.end(r));
        for (std::uint32_t id = part.begin(r); id < part.end(r); ++id)
            REQUIRE(part.rank_of(id) == r);
    }
}

} // namespace

TEST_CASE("whole-column partitioning balances within one column") {
    Topology topo = build_topology(small_grid(4, 4));

    SECTION("16 columns over 4 ranks: 4 columns each") {
        PartitionMap part = partition_columns(topo, 4);
        check_cover(part, topo.n_neurons);
        REQUIRE(part.columns_per_rank == Catch::Approx(4.0));
        for (std::uint32_t r = 0; r < 4; ++r) REQUIRE(part.owned(r) == 4 * 100);
    }

    SECTION("16 columns over 3 ranks: counts differ by at most one column") {
        PartitionMap part = partition_columns(topo, 3);
        check_cover(part, topo.n_neurons);
        std::uint32_t lo = UINT32_MAX, hi = 0;
        for (std::uint32_t r = 0; r < 3; ++r) {
            lo = std::min(lo, part.owned(r));
            hi = std::max(hi, part.owned(r));
        }
        REQUIRE(hi - lo <= 100);
        // boundaries sit on column edges
        for (auto b : part.range_begin) REQUIRE(b % 100 == 0);
    }
}

TEST_CASE("column splitting uses equal contiguous blocks") {
    GridConfig cfg = small_grid(4, 4, 1250);
    Topology topo = build_topology(cfg);

    // 16 columns over 32 ranks: half a column (625 neurons) per rank
    PartitionMap part = partition_columns(topo, 32);
    check_cover(part, topo.n_neurons);
    REQUIRE(part.columns_per_rank == Catch::Approx(0.5));
    for (std::uint32_t r = 0; r < 32; ++r) REQUIRE(part.owned(r) == 625);
}

TEST_CASE("partitioning rejects impossible rank counts") {
    GridConfig cfg = small_grid(1, 1, 10);
    cfg.out_degree_exc = 5;
    cfg.out_degree_inh = 4;
    Topology topo = build_topology(cfg);
    REQUIRE_THROWS_AS(partition_columns(topo, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(partition_columns(topo, 11), std::invalid_argument);
}

TEST_CASE("routing equals a brute-force cross-rank synapse scan") {
    Topology topo = build_network(small_grid(4, 4));

    for (std::uint32_t n_ranks : {1u, 2u, 4u, 8u}) {
        PartitionMap part = partition_columns(topo, n_ranks);
        RoutingTable routing = build_routing_tables(topo, part);

        std::vector<std::set<std::uint32_t>> expect(n_ranks);
        for (std::uint32_t src = 0; src < topo.n_neurons; ++src) {
            const std::uint32_t sr = part.rank_of(src);
            for (std::uint64_t i = topo.syn_offset[src]; i < topo.syn_offset[src + 1]; ++i) {
                const std::uint32_t dr = part.rank_of(topo.syn_target[i]);
                if (dr != sr) expect[sr].insert(dr);
            }
        }
        for (std::uint32_t r = 0; r < n_ranks; ++r) {
            std::vector<std::uint32_t> want(expect[r].begin(), expect[r].end());
            REQUIRE(routing.destinations[r] == want);
        }
        if (n_ranks == 1) REQUIRE(routing.destinations[0].empty());
    }
}

TEST_CASE("inhibitory neurons never cross ranks when columns stay whole") {
    Topology topo = build_network(small_grid(4, 2));
    PartitionMap part = partition_columns(topo, 4);
    for (std::uint32_t src = 0; src < topo.n_neurons; ++src) {
        if (topo.is_excitatory(src)) continue;
        const std::uint32_t sr = part.rank_of(src);
        for (std::uint64_t i = topo.syn_offset[src]; i < topo.syn_offset[src + 1]; ++i)
            REQUIRE(part.rank_of(topo.syn_target[i]) == sr);
    }
}

TEST_CASE("for_each_target_rank walks the whole span in rank order") {
    Topology topo = build_network(small_grid(2, 2));
    PartitionMap part = partition_columns(topo, 4);

    for (std::uint32_t src = 0; src < topo.n_neurons; src += 37) {
        std::uint64_t covered = topo.syn_offset[src];
        for_each_target_rank(topo, part, src,
                             [&](std::uint32_t rank, std::uint64_t lo, std::uint64_t hi) {
                                 REQUIRE(lo == covered);
                                 REQUIRE(hi > lo);
                                 for (std::uint64_t i = lo; i < hi; ++i)
                                     REQUIRE(part.rank_of(topo.syn_target[i]) == rank);
                                 covered = hi;
                             });
        REQUIRE(covered == topo.syn_offset[src + 1]);
    }
}
