#include "doctest.h"

#include "sedmdp/envs.hpp"
#include "sedmdp/oracles.hpp"

#include <array>
#include <cmath>
#include <vector>

using namespace sedmdp;

namespace {

MdpSpec tiny_two_state() {
    MdpSpec mdp;
    mdp.name = "tiny";
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.transitions = {0.7, 0.3, 0.2, 0.8, 0.6, 0.4, 0.1, 0.9};
    mdp.rewards = {1.0, 0.0, 0.0, 2.0};
    mdp.initial = {1.0, 0.0};
    mdp.discount = 0.9;
    mdp.terminal.assign(2, 0);
    return mdp;
}

SedConfig tiny_delayed() {
    return SedConfig{tiny_two_state(), DelayProcess::iid({0.5, 0.5}), {0}};
}

} // namespace

TEST_SUITE("oracles") {

TEST_CASE("augmented ids pack the state and the pending queue") {
    AugmentedSolution sol;
    sol.n_states = 2;
    sol.n_actions = 3;
    sol.max_delay = 2;
    sol.n_augmented = 2 * 9;

    const std::array<int, 2> queue = {2, 0};
    CHECK(sol.encode(1, queue) == 15);
    const auto [s, q] = sol.decode(15);
    CHECK(s == 1);
    CHECK(q == std::vector<int>{2, 0});

    for (std::int64_t id = 0; id < sol.n_augmented; ++id) {
        const auto [ds, dq] = sol.decode(id);
        CHECK(sol.encode(ds, dq) == id);
    }
}

TEST_CASE("chain control under delay prices the pending queue") {
    const MdpSpec chain = make_chain(5, 0.0, 0.9);
    const AugmentedSolution sol = augmented_vi(chain, 2);
    const std::array<int, 2> right_right = {1, 1};
    const std::array<int, 2> left_left = {0, 0};
    // Goal entry pays 1: three steps away with RIGHTs pending, five with LEFTs.
    CHECK(sol.value_at(0, right_right) == doctest::Approx(0.729).epsilon(1e-9));
    CHECK(sol.value_at(0, left_left) == doctest::Approx(0.59049).epsilon(1e-9));
    CHECK(sol.initial_value(chain, right_right) == doctest::Approx(0.729).epsilon(1e-9));
}

TEST_CASE("zero delay reduces the augmented problem to plain value iteration") {
    const MdpSpec chain = make_chain(6, 0.15, 0.95);
    const ValueSolution flat = value_iteration(chain, 1e-12);
    const AugmentedSolution sol = augmented_vi(chain, 0, 1e-12);
    REQUIRE(sol.n_augmented == chain.n_states);
    for (int s = 0; s < chain.n_states; ++s) {
        CHECK(sol.values[static_cast<std::size_t>(s)] ==
              doctest::Approx(flat.values[static_cast<std::size_t>(s)]).epsilon(1e-9));
    }
}

TEST_CASE("longer delay with unhelpful defaults can only lose value") {
    const MdpSpec chain = make_chain(5, 0.1, 0.9);
    const AugmentedSolution m0 = augmented_vi(chain, 0);
    const AugmentedSolution m1 = augmented_vi(chain, 1);
    const AugmentedSolution m2 = augmented_vi(chain, 2);
    const std::vector<int> q0;
    const std::vector<int> q1 = {0};
    const std::vector<int> q2 = {0, 0};
    const double v0 = m0.initial_value(chain, q0);
    const double v1 = m1.initial_value(chain, q1);
    const double v2 = m2.initial_value(chain, q2);
    CHECK(v0 > v1 + 1e-6);
    CHECK(v1 > v2 + 1e-6);
}

TEST_CASE("value iteration reports when it cannot converge") {
    const MdpSpec chain = make_chain(6, 0.2, 0.99);
    CHECK_THROWS_WITH_AS(value_iteration(chain, 1e-14, 3), doctest::Contains("residual"),
                         std::runtime_error);
}

TEST_CASE("enumeration and augmentation refuse oversized requests up front") {
    const SedConfig config = tiny_delayed();
    const UniformPolicy uniform(2);
    EnumerationBudget budget;
    budget.max_histories = 10;
    try {
        enumerate_histories(config, uniform, 2, budget);  // estimate 8^2 = 64
        FAIL("expected ResourceError");
    } catch (const ResourceError& err) {
        CHECK(err.estimated_count == doctest::Approx(64.0));
        CHECK(err.budget_count == 10);
    }

    const MdpSpec chain = make_chain(5, 0.1, 0.9);
    try {
        augmented_vi(chain, 12, 1e-10, 1000);  // 5 * 2^12 queue layouts
        FAIL("expected ResourceError");
    } catch (const ResourceError& err) {
        CHECK(err.estimated_count == doctest::Approx(20480.0));
        CHECK(err.budget_count == 1000);
    }
}

TEST_CASE("sampled marginals land within binomial error of the exact ones") {
    const SedConfig config = tiny_delayed();
    const UniformPolicy uniform(2);
    const std::array<int, 2> z = {1, 0};
    const int t = 2;
    const std::int64_t n = 20000;
    const std::vector<double> exact = process_marginal(config, uniform, 0, z, t);
    const std::vector<double> sampled = monte_carlo_marginal(config, uniform, 0, z, t, n, 777);
    REQUIRE(sampled.size() == exact.size());
    double total = 0.0;
    for (std::size_t s = 0; s < exact.size(); ++s) {
        const double p = exact[s];
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
        CHECK(std::abs(sampled[s] - p) <= 3.0 * sigma);
        total += sampled[s];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampled marginals handle edges and reject bad arguments") {
    const SedConfig config = tiny_delayed();
    const UniformPolicy uniform(2);
    const std::array<int, 1> z = {1};
    const std::vector<double> start = monte_carlo_marginal(config, uniform, 0, z, 0, 50, 1);
    CHECK(start == std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(monte_carlo_marginal(config, uniform, 0, z, 1, 0, 1),
                    std::invalid_argument);
    const std::array<int, 1> too_short = {1};
    CHECK_THROWS_AS(monte_carlo_marginal(config, uniform, 0, too_short, 2, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("sampled marginals are reproducible for a fixed seed") {
    const SedConfig config = tiny_delayed();
    const UniformPolicy uniform(2);
    const std::array<int, 2> z = {1, 1};
    const std::vector<double> a = monte_carlo_marginal(config, uniform, 0, z, 2, 5000, 42);
    const std::vector<double> b = monte_carlo_marginal(config, uniform, 0, z, 2, 5000, 42);
    const std::vector<double> c = monte_carlo_marginal(config, uniform, 0, z, 2, 5000, 43);
    CHECK(a == b);
    CHECK(a != c);
}

} // TEST_SUITE
