#include "sedmdp/policy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedmdp {

namespace {

int state_at_rule_time(const History& h, std::int64_t rule_time) {
    if (rule_time < 0 || rule_time >= static_cast<std::int64_t>(h.states.size())) {
        std::ostringstream oss;
        oss << "rule time " << rule_time << " outside history of " << h.states.size()
            << " states";
        throw std::logic_error(oss.str());
    }
    return h.states[static_cast<std::size_t>(rule_time)];
}

std::vector<double> point_mass(int action, int n_actions) {
    if (action < 0 || action >= n_actions) {
        std::ostringstream oss;
        oss << "policy chose action " << action << " outside [0, " << n_actions << ")";
        throw std::logic_error(oss.str());
    }
    std::vector<double> probs(static_cast<std::size_t>(n_actions), 0.0);
    probs[static_cast<std::size_t>(action)] = 1.0;
    return probs;
}

} // namespace

void check_distribution(const std::vector<double>& probs, int n_actions) {
    if (static_cast<int>(probs.size()) != n_actions) {
        std::ostringstream oss;
        oss << "policy emitted " << probs.size() << " probabilities, expected " << n_actions;
        throw std::logic_error(oss.str());
    }
    double sum = 0.0;
    for (double v : probs) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::logic_error("policy emitted a negative or non-finite probability");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream oss;
        oss << "policy distribution sums to " << sum << ", off by " << sum - 1.0;
        throw std::logic_error(oss.str());
    }
}

MarkovRandomizedPolicy::MarkovRandomizedPolicy(std::vector<std::vector<std::vector<double>>> rules,
                                               int n_actions)
    : rules_(std::move(rules)), n_actions_(n_actions),
      uniform_(static_cast<std::size_t>(n_actions), 1.0 / n_actions) {
    if (n_actions < 1) throw std::invalid_argument("policy needs at least one action");
    for (const auto& per_state : rules_) {
        for (const auto& row : per_state) check_distribution(row, n_actions_);
    }
}

std::vector<double> MarkovRandomizedPolicy::action_probs(std::int64_t rule_time,
                                                         const History& h) const {
    return rule(rule_time, state_at_rule_time(h, rule_time));
}

const std::vector<double>& MarkovRandomizedPolicy::rule(std::int64_t rule_time, int state) const {
    if (rule_time < 0 || rule_time >= static_cast<std::int64_t>(rules_.size())) return uniform_;
    const auto& per_state = rules_[static_cast<std::size_t>(rule_time)];
    if (state < 0 || state >= static_cast<int>(per_state.size())) {
        std::ostringstream oss;
        oss << "state " << state << " outside rule table for time " << rule_time;
        throw std::logic_error(oss.str());
    }
    return per_state[static_cast<std::size_t>(state)];
}

MarkovDeterministicPolicy::MarkovDeterministicPolicy(std::vector<std::vector<int>> choice,
                                                     int n_actions)
    : choice_(std::move(choice)), n_actions_(n_actions) {
    if (n_actions < 1) throw std::invalid_argument("policy needs at least one action");
}

std::vector<double> MarkovDeterministicPolicy::action_probs(std::int64_t rule_time,
                                                            const History& h) const {
    return point_mass(choice(rule_time, state_at_rule_time(h, rule_time)), n_actions_);
}

int MarkovDeterministicPolicy::choice(std::int64_t rule_time, int state) const {
    if (rule_time < 0 || rule_time >= static_cast<std::int64_t>(choice_.size())) {
        std::ostringstream oss;
        oss << "rule time " << rule_time << " outside deterministic rule table of "
            << choice_.size() << " entries";
        throw std::logic_error(oss.str());
    }
    const auto& per_state = choice_[static_cast<std::size_t>(rule_time)];
    if (state < 0 || state >= static_cast<int>(per_state.size())) {
        std::ostringstream oss;
        oss << "state " << state << " outside rule table for time " << rule_time;
        throw std::logic_error(oss.str());
    }
    return per_state[static_cast<std::size_t>(state)];
}

StationaryDeterministicPolicy::StationaryDeterministicPolicy(std::vector<int> choice,
                                                             int n_actions)
    : choice_(std::move(choice)), n_actions_(n_actions) {
    if (n_actions < 1) throw std::invalid_argument("policy needs at least one action");
}

std::vector<double> StationaryDeterministicPolicy::action_probs(std::int64_t rule_time,
                                                                const History& h) const {
    const int s = state_at_rule_time(h, rule_time);
    if (s < 0 || s >= static_cast<int>(choice_.size())) {
        std::ostringstream oss;
        oss << "state " << s << " outside stationary rule table of " << choice_.size()
            << " entries";
        throw std::logic_error(oss.str());
    }
    return point_mass(choice_[static_cast<std::size_t>(s)], n_actions_);
}

UniformPolicy::UniformPolicy(int n_actions) : n_actions_(n_actions) {
    if (n_actions < 1) throw std::invalid_argument("policy needs at least one action");
}

std::vector<double> UniformPolicy::action_probs(std::int64_t, const History&) const {
    return std::vector<double>(static_cast<std::size_t>(n_actions_), 1.0 / n_actions_);
}

int decide(const Policy& policy, std::int64_t rule_time, const History& h, int n_actions,
           RngStream& rng) {
    std::vector<double> probs = policy.action_probs(rule_time, h);
    check_distribution(probs, n_actions);
    return rng.categorical(probs);
}

} // namespace sedmdp
