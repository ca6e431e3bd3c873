#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sedmdp/delay.hpp"
#include "sedmdp/queue.hpp"
#include "sedmdp/rng.hpp"

using namespace sedmdp;

namespace {

// Window from the worked five-step prefix: decisions at t = 0..4 with
// observed delays (5, 4, 4, 4, 3) and action ids 10..14, M = 5.
QueueState worked_example_queue() {
    QueueState q({0, 1, 2, 3, 4}, 5);
    const int delays[5] = {5, 4, 4, 4, 3};
    for (int t = 0; t < 5; ++t) q.push(10 + t, delays[t]);
    return q;
}

} // namespace

TEST_SUITE("queues") {

TEST_CASE("earliest execution time is decision time plus delay") {
    CHECK(earliest_execution_time(0, 5, 5) == 5);
    CHECK(earliest_execution_time(1, 4, 5) == 5);
    CHECK(earliest_execution_time(2, 4, 5) == 6);
    CHECK(earliest_execution_time(3, 4, 5) == 7);
    CHECK(earliest_execution_time(4, 3, 5) == 7);
    CHECK(earliest_execution_time(42, 0, 5) == 42);
    CHECK_THROWS_AS(earliest_execution_time(0, 6, 5), std::invalid_argument);
    CHECK_THROWS_AS(earliest_execution_time(0, -1, 5), std::invalid_argument);
}

TEST_CASE("pending queue of the worked five-step prefix, all current delays") {
    QueueState q = worked_example_queue();
    REQUIRE(q.time() == 5);
    CHECK(resolve_pending_queue(q, 5) == std::vector<int>{11, 12, 14, 14, 14});
    CHECK(resolve_pending_queue(q, 4) == std::vector<int>{11, 12, 14, 14});
    CHECK(resolve_pending_queue(q, 3) == std::vector<int>{11, 12, 14});
    CHECK(resolve_pending_queue(q, 2) == std::vector<int>{11, 12});
    CHECK(resolve_pending_queue(q, 1) == std::vector<int>{11});
    CHECK(resolve_pending_queue(q, 0).empty());
}

TEST_CASE("effective decision time of the worked prefix") {
    QueueState q = worked_example_queue();
    for (int z = 1; z <= 5; ++z) CHECK(effective_decision_time(q, z) == 1);
    CHECK(effective_decision_time(q, 0) == 5);
}

TEST_CASE("switch time") {
    const std::vector<int> worked = {5, 4, 4, 4, 3};
    CHECK(switch_time(worked, 5) == 5);  // min(5, 5, 6, 7, 7)
    const std::vector<int> zeros = {0, 0, 0};
    CHECK(switch_time(zeros, 3) == 0);
    const std::vector<int> full = {4, 4, 4, 4};
    CHECK(switch_time(full, 4) == 4);  // bounded by z_0 <= M
    CHECK(switch_time(std::vector<int>{}, 0) == 0);
    CHECK_THROWS_AS(switch_time(std::vector<int>{1, 2}, 3), std::invalid_argument);
    CHECK_THROWS_AS(switch_time(std::vector<int>{9, 0, 0}, 3), std::invalid_argument);
}

TEST_CASE("fresh queue surfaces the default actions in order") {
    QueueState q({7, 8, 9}, 3);
    CHECK(q.time() == 0);
    CHECK(resolve_pending_queue(q, 3) == std::vector<int>{7, 8, 9});
    CHECK(resolve_pending_queue(q, 2) == std::vector<int>{7, 8});
    // Max-delay first observation resolves to the oldest virtual slot.
    CHECK(effective_decision_time(q, 3) == -3);
    CHECK(q.action_at(-3) == 7);
    CHECK(q.delay_at(-1) == 3);
}

TEST_CASE("zero delays degenerate to the undelayed process") {
    QueueState q({}, 0);
    for (int t = 0; t < 6; ++t) {
        CHECK(effective_decision_time(q, 0) == t);
        CHECK(resolve_pending_queue(q, 0).empty());
        q.push(t % 2, 0);
    }
    CHECK_THROWS_AS(effective_decision_time(q, 1), std::invalid_argument);
}

TEST_CASE("queue validation") {
    CHECK_THROWS_AS(QueueState({1, 2}, 3), std::invalid_argument);
    QueueState q({0, 0}, 2);
    CHECK_THROWS_AS(q.push(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(q.push(-1, 1), std::invalid_argument);
    CHECK_THROWS_AS(q.action_at(2), std::invalid_argument);
    CHECK_THROWS_AS(q.action_at(-3), std::invalid_argument);
}

TEST_CASE("properties over random delay sequences") {
    RngStream rng(2026);
    for (int rep = 0; rep < 200; ++rep) {
        const int max_delay = 1 + rng.uniform_int(6);
        std::vector<int> defaults;
        for (int i = 0; i < max_delay; ++i) defaults.push_back(rng.uniform_int(3));
        QueueState q(defaults, max_delay);
        std::int64_t prev_tau = -max_delay - 1;
        for (int t = 0; t < 40; ++t) {
            const int z = rng.uniform_int(max_delay + 1);
            const std::int64_t tau = effective_decision_time(q, z);
            // Due and most recent: the resolved decision has come due, and
            // the sequence of resolutions never moves backwards.
            CHECK(tau <= q.time());
            const int tau_delay = (tau == q.time()) ? z : q.delay_at(tau);
            CHECK(tau + tau_delay <= q.time());
            CHECK(tau >= prev_tau);
            prev_tau = tau;

            const std::vector<int> pending = resolve_pending_queue(q, z);
            CHECK(static_cast<int>(pending.size()) == z);
            if (z > 0) CHECK(pending.front() == q.action_at(tau));

            // Stability under extension: appending the decision made now
            // cannot change slots before its own execution time. Slot t+j
            // (j >= 1) seen from time t+1 is entry j-1 of the next resolve.
            const int decided = rng.uniform_int(3);
            if (z >= 1) {
                QueueState next = q;
                next.push(decided, z);
                const std::vector<int> later = resolve_pending_queue(next, z - 1);
                for (int j = 1; j < z; ++j)
                    CHECK(later[static_cast<std::size_t>(j - 1)] == pending[static_cast<std::size_t>(j)]);
            }
            q.push(decided, z);
        }
    }
}

} // TEST_SUITE("queues")

TEST_SUITE("delays") {

TEST_CASE("constant process always emits the bound") {
    DelayProcess p = DelayProcess::constant(4);
    RngStream rng(1);
    for (int i = 0; i < 10; ++i) CHECK(delay_step(p, rng) == 4);
    const std::vector<double> probs = p.iid_probs();
    REQUIRE(probs.size() == 5);
    CHECK(probs[4] == 1.0);
    CHECK(probs[0] == 0.0);
}

TEST_CASE("iid process validation and sampling") {
    CHECK_THROWS_AS(DelayProcess::iid({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(DelayProcess::iid({-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(DelayProcess::iid({}), std::invalid_argument);
    DelayProcess p = DelayProcess::iid({0.0, 1.0, 0.0});
    CHECK(p.max_delay() == 2);
    RngStream rng(2);
    for (int i = 0; i < 10; ++i) CHECK(delay_step(p, rng) == 1);
}

TEST_CASE("random walk starts at the bound and steps by at most one") {
    DelayProcess p = DelayProcess::random_walk(5);
    RngStream rng(3);
    int prev = delay_step(p, rng);
    CHECK(prev == 5);
    for (int i = 0; i < 1000; ++i) {
        const int z = delay_step(p, rng);
        CHECK(z >= 0);
        CHECK(z <= 5);
        CHECK(std::abs(z - prev) <= 1);
        prev = z;
    }
    CHECK_THROWS_AS(p.iid_probs(), std::invalid_argument);
}

TEST_CASE("random walk clamps at both bounds") {
    RngStream rng(4);
    DelayProcess up = DelayProcess::random_walk(3, 1.0, 0.0);
    CHECK(delay_step(up, rng) == 3);
    for (int i = 0; i < 5; ++i) CHECK(delay_step(up, rng) == 3);  // up-draws clamp at M
    DelayProcess down = DelayProcess::random_walk(3, 0.0, 1.0);
    CHECK(delay_step(down, rng) == 3);
    CHECK(delay_step(down, rng) == 2);
    CHECK(delay_step(down, rng) == 1);
    CHECK(delay_step(down, rng) == 0);
    for (int i = 0; i < 5; ++i) CHECK(delay_step(down, rng) == 0);  // down-draws clamp at 0
}

TEST_CASE("random walk interior move frequencies match the step law") {
    DelayProcess p = DelayProcess::random_walk(5, 0.2, 0.2);
    RngStream rng(20260821);
    int prev = delay_step(p, rng);
    std::int64_t up_base = 0, up_hit = 0, down_base = 0, down_hit = 0;
    for (int i = 0; i < 100000; ++i) {
        const int z = delay_step(p, rng);
        if (prev < 5) {
            ++up_base;
            if (z == prev + 1) ++up_hit;
        }
        if (prev > 0) {
            ++down_base;
            if (z == prev - 1) ++down_hit;
        }
        prev = z;
    }
    const double up_freq = static_cast<double>(up_hit) / static_cast<double>(up_base);
    const double down_freq = static_cast<double>(down_hit) / static_cast<double>(down_base);
    CHECK(up_freq == doctest::Approx(0.2).epsilon(0.05));   // |f - 0.2| <= 0.01
    CHECK(std::abs(up_freq - 0.2) <= 0.01);
    CHECK(std::abs(down_freq - 0.2) <= 0.01);
}

TEST_CASE("walk state persists and can be forced for carryover scenarios") {
    DelayProcess p = DelayProcess::random_walk(10);
    p.set_walk_value(7);
    RngStream rng(6);
    const int z = delay_step(p, rng);
    CHECK(z >= 6);
    CHECK(z <= 8);
    CHECK(p.walk_value() == z);
    DelayProcess c = DelayProcess::constant(2);
    CHECK_THROWS_AS(c.set_walk_value(1), std::invalid_argument);
}

} // TEST_SUITE("delays")
