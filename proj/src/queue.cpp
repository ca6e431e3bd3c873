#include "sedmdp/queue.hpp"

#include <stdexcept>
#include <string>

namespace sedmdp {

QueueState::QueueState(std::vector<int> default_actions, int max_delay)
    : max_delay_(max_delay), default_actions_(std::move(default_actions)) {
    if (max_delay < 0) throw std::invalid_argument("queue: max delay must be >= 0");
    if (static_cast<int>(default_actions_.size()) != max_delay)
        throw std::invalid_argument("queue: need exactly M default actions, got " +
                                    std::to_string(default_actions_.size()) + " for M = " +
                                    std::to_string(max_delay));
    actions_ = default_actions_;
    delays_.assign(default_actions_.size(), max_delay_);  // virtual slot -M+i executes at i
}

void QueueState::push(int action, int delay) {
    if (action < 0) throw std::invalid_argument("queue: action id must be >= 0");
    if (delay < 0 || delay > max_delay_)
        throw std::invalid_argument("queue: delay " + std::to_string(delay) + " out of [0, " +
                                    std::to_string(max_delay_) + "]");
    if (max_delay_ > 0) {
        actions_.erase(actions_.begin());
        delays_.erase(delays_.begin());
        actions_.push_back(action);
        delays_.push_back(delay);
    }
    ++time_;
}

std::size_t QueueState::index_of(std::int64_t decided_at, const char* who) const {
    const std::int64_t lo = time_ - max_delay_;
    if (decided_at < lo || decided_at >= time_)
        throw std::invalid_argument(std::string(who) + ": decision time " +
                                    std::to_string(decided_at) + " outside window [" +
                                    std::to_string(lo) + ", " + std::to_string(time_ - 1) + "]");
    return static_cast<std::size_t>(decided_at - lo);
}

int QueueState::action_at(std::int64_t decided_at) const {
    return actions_[index_of(decided_at, "action_at")];
}

int QueueState::delay_at(std::int64_t decided_at) const {
    return delays_[index_of(decided_at, "delay_at")];
}

std::int64_t earliest_execution_time(std::int64_t t, int delay, int max_delay) {
    if (delay < 0 || delay > max_delay)
        throw std::invalid_argument("earliest_execution_time: delay " + std::to_string(delay) +
                                    " out of [0, " + std::to_string(max_delay) + "]");
    return t + delay;
}

std::int64_t effective_decision_time(const QueueState& queue, int current_delay) {
    const std::int64_t t = queue.time();
    if (current_delay < 0 || current_delay > queue.max_delay())
        throw std::invalid_argument("effective_decision_time: delay out of [0, M]");
    if (current_delay == 0) return t;  // the fresh decision itself comes due now
    for (std::int64_t d = t - 1; d >= t - queue.max_delay(); --d) {
        if (d + queue.delay_at(d) <= t) return d;
    }
    throw std::logic_error("effective_decision_time: no decision has come due; queue corrupted");
}

std::vector<int> resolve_pending_queue(const QueueState& queue, int current_delay) {
    const std::int64_t t = queue.time();
    if (current_delay < 0 || current_delay > queue.max_delay())
        throw std::invalid_argument("resolve_pending_queue: delay out of [0, M]");
    std::vector<int> pending;
    pending.reserve(static_cast<std::size_t>(current_delay));
    for (std::int64_t u = t; u < t + current_delay; ++u) {
        std::int64_t resolved = t;  // sentinel: below the valid range
        for (std::int64_t d = t - 1; d >= t - queue.max_delay(); --d) {
            if (d + queue.delay_at(d) <= u) { resolved = d; break; }
        }
        if (resolved == t)
            throw std::logic_error("resolve_pending_queue: no decision covers slot " +
                                   std::to_string(u) + "; queue corrupted");
        pending.push_back(queue.action_at(resolved));
    }
    return pending;
}

std::int64_t switch_time(std::span<const int> first_delays, int max_delay) {
    if (static_cast<int>(first_delays.size()) != max_delay)
        throw std::invalid_argument("switch_time: need exactly M delay values, got " +
                                    std::to_string(first_delays.size()));
    std::int64_t best = 0;  // M = 0: the agent governs from the start
    for (std::size_t i = 0; i < first_delays.size(); ++i) {
        const int z = first_delays[i];
        if (z < 0 || z > max_delay)
            throw std::invalid_argument("switch_time: delay out of [0, M]");
        const std::int64_t candidate = z + static_cast<std::int64_t>(i);
        if (i == 0 || candidate < best) best = candidate;
    }
    return best;
}

} // namespace sedmdp
