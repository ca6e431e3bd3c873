#pragma once

#include "sedmdp/exact.hpp"
#include "sedmdp/policy.hpp"
#include "sedmdp/sed_env.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sedmdp {

// Thrown when a computation would exceed its enumeration budget; carries the
// estimated work so callers can report or re-budget.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, double estimated, std::int64_t budget)
        : std::runtime_error(what), estimated_count(estimated), budget_count(budget) {}

    double estimated_count;
    std::int64_t budget_count;
};

struct EnumerationBudget {
    std::int64_t max_histories = 2'000'000;
};

struct WeightedHistory {
    History history;
    double probability = 0.0;
};

// All positive-probability histories of `horizon` steps together with their
// probabilities (i.i.d.-delay processes only). The work estimate
// (n_states * n_actions * (M+1))^horizon is checked against the budget
// before anything runs; exceeding it raises ResourceError.
std::vector<WeightedHistory> enumerate_histories(const SedConfig& config, const Policy& policy,
                                                 int horizon,
                                                 const EnumerationBudget& budget = {});

struct ValueSolution {
    std::vector<double> values;  // per state
    std::vector<int> greedy;     // an optimal action per state
    int iterations = 0;
    double residual = 0.0;
};

// Infinite-horizon discounted value iteration to sup-norm tolerance tol.
ValueSolution value_iteration(const MdpSpec& mdp, double tol = 1e-10,
                              int max_iterations = 1000000);

// Optimal control of the delay-M problem via the augmented construction:
// states are (s, pending queue of M actions); the queue head executes and the
// newly decided action joins the tail.
struct AugmentedSolution {
    int n_states = 0;
    int n_actions = 0;
    int max_delay = 0;
    std::int64_t n_augmented = 0;
    std::vector<double> values;  // per augmented state id
    std::vector<int> greedy;
    int iterations = 0;
    double residual = 0.0;

    std::int64_t encode(int s, std::span<const int> queue) const;
    std::pair<int, std::vector<int>> decode(std::int64_t id) const;
    double value_at(int s, std::span<const int> queue) const;
    // Expected optimal value from the start distribution with the given
    // pending defaults.
    double initial_value(const MdpSpec& mdp, std::span<const int> default_queue) const;
};

AugmentedSolution augmented_vi(const MdpSpec& mdp, int max_delay, double tol = 1e-10,
                               std::int64_t max_augmented_states = 20'000'000);

// Best achievable expected discounted return over `horizon` steps under the
// fixed delay sequence z, maximized over (a) deterministic time-and-state
// rules, exhaustively, and (b) deterministic history-dependent rules, by
// backward induction on the history tree (decisions bind every later step
// that shares the same decision time).
struct PolicyClassValues {
    double best_markov = 0.0;
    double best_history = 0.0;
    std::vector<std::vector<int>> markov_choice;  // [t][s], argmax over (a)
};

PolicyClassValues best_markov_vs_best_history(const SedConfig& config, int horizon,
                                              std::span<const int> z,
                                              std::int64_t max_policies = 4'000'000);

// Monte Carlo estimate of process_marginal by running the pending-queue
// mechanism n times with the delay sequence pinned to z. All randomness
// derives from `seed`; estimates are averages of indicator draws, so the
// usual binomial error bars apply.
std::vector<double> monte_carlo_marginal(const SedConfig& config, const Policy& policy, int s0,
                                         std::span<const int> z, int t, std::int64_t n,
                                         std::uint64_t seed);

} // namespace sedmdp
