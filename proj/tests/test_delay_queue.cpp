#include <catch_amalgamated.hpp>

#include <minidpsnn/delay_queue.hpp>
#include <minidpsnn/rng.hpp>

#include <map>

using namespace minidpsnn;

TEST_CASE("a spike with delay 2 emitted at step 3 is readable at step 5 only") {
    DelayQueues<int> q;
    q.enqueue(7, 3, 2);
    REQUIRE(q.drain(3).empty());
    REQUIRE(q.drain(4).empty());
    auto& due = q.drain(5);
    REQUIRE(due.size() == 1);
    REQUIRE(due[0] == 7);
    REQUIRE(q.drain(5 + q.horizon()).empty()); // consumed
}

TEST_CASE("same-bucket events keep insertion order") {
    DelayQueues<int> q;
    q.enqueue(1, 0, 4);
    q.enqueue(2, 1, 3);
    q.enqueue(3, 2, 2);
    auto& due = q.drain(4);
    REQUIRE(due == std::vector<int>{1, 2, 3});
}

TEST_CASE("delays outside [1, horizon] are rejected") {
    DelayQueues<int> q;
    REQUIRE_THROWS_AS(q.enqueue(1, 0, 0), std::out_of_range);
    REQUIRE_THROWS_AS(q.enqueue(1, 0, q.horizon() + 1), std::out_of_range);
}

TEST_CASE("delay equal to the horizon reuses the freshly drained bucket") {
    DelayQueues<int> q;
    const std::uint32_t h = q.horizon();
    for (std::uint64_t step = 0; step < 3 * h; ++step) {
        auto& due = q.drain(step);
        if (step >= h) {
            REQUIRE(due.size() == 1);
            REQUIRE(due[0] == int(step - h));
        } else {
            REQUIRE(due.empty());
        }
        q.enqueue(int(step), step, h);
    }
}

TEST_CASE("random schedule of 10^3 events matches a naive step map") {
    DelayQueues<int> q;
    std::map<std::uint64_t, std::vector<int>> naive;
    CounterRng rng(23, 0);

    const std::uint64_t n_steps = 300;
    int next_tag = 0;
    for (std::uint64_t step = 0; step < n_steps; ++step) {
        // drain before same-step insertion, as the engine does
        auto& due = q.drain(step);
        REQUIRE(due == naive[step]);

        const std::uint32_t burst = rng.uniform_below(6);
        for (std::uint32_t k = 0; k < burst; ++k) {
            const std::uint32_t delay = 1 + rng.uniform_below(q.horizon());
            q.enqueue(next_tag, step, delay);
            naive[step + delay].push_back(next_tag);
            ++next_tag;
        }
    }
    REQUIRE(next_tag > 500); // the schedule actually exercised the queue
}
