#pragma once

#include "sedmdp/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace sedmdp {

// Prefix of an episode: states s_0..s_t, observed delays z_0..z_t, and the
// actions *executed* at steps 0..t-1. Decision rules receive the full
// current history; rule-specific kinds below only read parts of it.
struct History {
    std::vector<int> states;
    std::vector<int> delays;
    std::vector<int> actions;

    int length() const { return static_cast<int>(actions.size()); }
};

// A policy is a sequence of decision rules indexed by the time the rule
// belongs to. Under execution delays the rule invoked at step t is the one
// for the effective decision time tau_t, applied to the history up to tau_t's
// step; callers pass the rule index and the history explicitly.
class Policy {
public:
    virtual ~Policy() = default;
    // Distribution over actions; must be nonnegative and sum to 1.
    virtual std::vector<double> action_probs(std::int64_t rule_time, const History& h) const = 0;
};

// Time-and-state dependent randomized rules: rules[t][s] is a distribution
// over actions. Rule times beyond the table fall back to uniform (the
// reduction emits uniform rows for decision times it never reaches).
class MarkovRandomizedPolicy final : public Policy {
public:
    MarkovRandomizedPolicy(std::vector<std::vector<std::vector<double>>> rules, int n_actions);

    std::vector<double> action_probs(std::int64_t rule_time, const History& h) const override;
    const std::vector<double>& rule(std::int64_t rule_time, int state) const;
    int horizon() const { return static_cast<int>(rules_.size()); }

private:
    std::vector<std::vector<std::vector<double>>> rules_;
    int n_actions_;
    std::vector<double> uniform_;
};

// Time-and-state dependent deterministic rules: choice[t][s] is an action.
class MarkovDeterministicPolicy final : public Policy {
public:
    MarkovDeterministicPolicy(std::vector<std::vector<int>> choice, int n_actions);

    std::vector<double> action_probs(std::int64_t rule_time, const History& h) const override;
    int choice(std::int64_t rule_time, int state) const;

private:
    std::vector<std::vector<int>> choice_;
    int n_actions_;
};

// One state-to-action map used at every rule time.
class StationaryDeterministicPolicy final : public Policy {
public:
    StationaryDeterministicPolicy(std::vector<int> choice, int n_actions);

    std::vector<double> action_probs(std::int64_t rule_time, const History& h) const override;

private:
    std::vector<int> choice_;
    int n_actions_;
};

class UniformPolicy final : public Policy {
public:
    explicit UniformPolicy(int n_actions);

    std::vector<double> action_probs(std::int64_t rule_time, const History& h) const override;

private:
    int n_actions_;
};

// Arbitrary history-dependent rules supplied as a callback; used by tests to
// build rules that read the starting state alongside the current one.
class CallbackPolicy final : public Policy {
public:
    using Fn = std::function<std::vector<double>(std::int64_t, const History&)>;
    explicit CallbackPolicy(Fn fn) : fn_(std::move(fn)) {}

    std::vector<double> action_probs(std::int64_t rule_time, const History& h) const override {
        return fn_(rule_time, h);
    }

private:
    Fn fn_;
};

// Samples an action from the rule's emitted distribution after checking it
// is a distribution over n_actions actions (throws std::logic_error otherwise).
int decide(const Policy& policy, std::int64_t rule_time, const History& h, int n_actions,
           RngStream& rng);

// Validation shared by decide and the exact calculators.
void check_distribution(const std::vector<double>& probs, int n_actions);

} // namespace sedmdp
