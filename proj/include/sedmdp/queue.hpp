#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sedmdp/rng.hpp"

namespace sedmdp {

// Sliding window of the last M decided (action, delay) pairs, indexed by
// decision time. A fresh queue at t = 0 is pre-populated with virtual
// pre-episode slots: slot -M+i carries default action i with delay M, so its
// earliest execution time is exactly i. That single convention makes the
// default-queue phase fall out of the same resolution rule as the rest of
// the episode: before the agent's first decision can land, the resolved
// action at time u is default action u.
class QueueState {
public:
    // default_actions supplies the M virtual slots (may be empty when M = 0).
    QueueState(std::vector<int> default_actions, int max_delay);

    int max_delay() const { return max_delay_; }
    std::int64_t time() const { return time_; }

    // Records the decision made at the current time and advances the clock.
    void push(int action, int delay);

    // Entry lookup for decision times in [time - M, time - 1].
    int action_at(std::int64_t decided_at) const;
    int delay_at(std::int64_t decided_at) const;

    const std::vector<int>& default_actions() const { return default_actions_; }

private:
    std::size_t index_of(std::int64_t decided_at, const char* who) const;

    int max_delay_ = 0;
    std::int64_t time_ = 0;
    std::vector<int> actions_;  // actions_[i] decided at time_ - M + i
    std::vector<int> delays_;
    std::vector<int> default_actions_;
};

// Execution slot of a decision made at time t with observed delay z: t + z.
std::int64_t earliest_execution_time(std::int64_t t, int delay, int max_delay);

// Effective decision time at the queue's current time t given the delay
// observed now: the latest t' in [t - M, t] whose decision has come due
// (t' + z_{t'} <= t). The oldest window entry always qualifies (its delay is
// bounded by M), so a valid queue always has a candidate; an empty candidate
// set means the queue was corrupted and raises logic_error.
std::int64_t effective_decision_time(const QueueState& queue, int current_delay);

// Actions that will execute at slots t .. t + z - 1 if no later decision
// intervenes: slot u resolves to the action decided at the latest t' < t
// with t' + z_{t'} <= u. Length equals the current delay; empty when z = 0.
std::vector<int> resolve_pending_queue(const QueueState& queue, int current_delay);

// First time the agent's own decisions can govern execution, given the
// delays of the first M decisions: min_i (delays[i] + i). Zero when M = 0.
std::int64_t switch_time(std::span<const int> first_delays, int max_delay);

} // namespace sedmdp
