#pragma once

#include "sedmdp/policy.hpp"
#include "sedmdp/sed_env.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sedmdp {

// Effective decision time for step l under the fixed delay sequence z
// (z[0], z[1], ...): the latest step in the window [l - M, l] whose action
// lands by l. Steps before 0 are the virtual slots that hold the default
// actions and carry delay M, so a candidate always exists; negative results
// mean "a default action executes".
std::int64_t effective_decision_time_for(std::span<const int> z, int max_delay, std::int64_t l);

// Probability the process assigns to one realized history (states s_0..s_T,
// observed delays z_0..z_T, *executed* actions a_0..a_{T-1}): the start
// weight, a delay factor per observed delay, and per step either a default-
// action indicator (before the first decided action lands) or the deciding
// rule's probability, times the transition kernel. Requires a per-step delay
// distribution, so the random-walk process is refused.
double trajectory_probability(const SedConfig& config, const Policy& policy, const History& h);

// Distribution of the state at step t, conditional on s_0 = s0 and the fixed
// delay sequence z (needs z_0..z_{t-1}).
std::vector<double> process_marginal(const SedConfig& config, const Policy& policy, int s0,
                                     std::span<const int> z, int t);

// Expected discounted return over `horizon` steps, from the initial state
// distribution, conditional on the fixed delay sequence z.
double fixed_delay_expected_return(const SedConfig& config, const Policy& policy, int horizon,
                                   std::span<const int> z);

// Collapses a history-dependent policy to time-and-state randomized rules
// that induce the same per-step state marginals under the same fixed delay
// sequence: rule j at state s' is the conditional law of the executed action
// whose decision time is j, given the decision-time state is s'. When several
// steps share a decision time the earliest step defines the rule; decision
// times never reached keep uniform rows.
MarkovRandomizedPolicy markov_reduction(const SedConfig& config, const Policy& policy,
                                        int horizon, int s0, std::span<const int> z);

// Exhaustive walk of the fixed-delay process from s0: calls visit(prob,
// states, actions) once per positive-probability path of `depth` steps, where
// states has depth+1 entries and actions the executed actions per step.
using PathVisitor =
    std::function<void(double, const std::vector<int>&, const std::vector<int>&)>;
void enumerate_fixed_delay_paths(const SedConfig& config, const Policy& policy, int s0,
                                 std::span<const int> z, int depth, const PathVisitor& visit);

} // namespace sedmdp
