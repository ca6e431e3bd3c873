#include "sedmdp/exact.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedmdp {

namespace {

int delay_at_slot(std::span<const int> z, int max_delay, std::int64_t slot) {
    if (slot < 0) return max_delay;  // virtual default slot
    return z[static_cast<std::size_t>(slot)];
}

void check_delays(std::span<const int> z, int max_delay, std::int64_t needed) {
    if (static_cast<std::int64_t>(z.size()) < needed) {
        std::ostringstream oss;
        oss << "delay sequence has " << z.size() << " entries, need at least " << needed;
        throw std::invalid_argument(oss.str());
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(needed); ++i) {
        if (z[i] < 0 || z[i] > max_delay) {
            std::ostringstream oss;
            oss << "delay z[" << i << "] = " << z[i] << " outside [0, " << max_delay << "]";
            throw std::invalid_argument(oss.str());
        }
    }
}

void check_state(const MdpSpec& mdp, int s, const char* what) {
    if (s < 0 || s >= mdp.n_states) {
        std::ostringstream oss;
        oss << what << " " << s << " outside [0, " << mdp.n_states << ")";
        throw std::invalid_argument(oss.str());
    }
}

// History prefix h_j = (s_0, z_0, a_0, ..., s_j, z_j) of a partial path.
History prefix_history(const std::vector<int>& states, std::span<const int> z,
                       const std::vector<int>& actions, std::int64_t j) {
    History h;
    const auto n = static_cast<std::size_t>(j + 1);
    h.states.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(n));
    h.delays.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
    h.actions.assign(actions.begin(), actions.begin() + static_cast<std::ptrdiff_t>(j));
    return h;
}

struct PathWalker {
    const SedConfig& config;
    const Policy& policy;
    std::span<const int> z;
    int depth;
    const PathVisitor& visit;

    std::vector<int> states;
    std::vector<int> actions;

    void run(double prob) {
        const auto l = static_cast<std::int64_t>(actions.size());
        if (l == depth) {
            visit(prob, states, actions);
            return;
        }
        const int m = config.max_delay();
        const std::int64_t tau = effective_decision_time_for(z, m, l);
        if (tau < 0) {
            descend(prob, config.default_queue[static_cast<std::size_t>(tau + m)]);
            return;
        }
        const History h = prefix_history(states, z, actions, tau);
        const std::vector<double> probs = policy.action_probs(tau, h);
        check_distribution(probs, config.mdp.n_actions);
        for (int a = 0; a < config.mdp.n_actions; ++a) {
            const double pa = probs[static_cast<std::size_t>(a)];
            if (pa > 0.0) descend(prob * pa, a);
        }
    }

    void descend(double prob, int action) {
        const int s = states.back();
        actions.push_back(action);
        for (int next = 0; next < config.mdp.n_states; ++next) {
            const double pt = config.mdp.p(s, action, next);
            if (pt <= 0.0) continue;
            states.push_back(next);
            run(prob * pt);
            states.pop_back();
        }
        actions.pop_back();
    }
};

} // namespace

std::int64_t effective_decision_time_for(std::span<const int> z, int max_delay, std::int64_t l) {
    if (l < 0) throw std::invalid_argument("step index must be nonnegative");
    check_delays(z, max_delay, l + 1);
    for (std::int64_t cand = l; cand >= l - max_delay; --cand) {
        if (cand + delay_at_slot(z, max_delay, cand) <= l) return cand;
    }
    throw std::logic_error("no effective decision time found; delay exceeds its bound");
}

double trajectory_probability(const SedConfig& config, const Policy& policy, const History& h) {
    config.validate();
    const MdpSpec& mdp = config.mdp;
    const int m = config.max_delay();
    const auto steps = static_cast<std::int64_t>(h.actions.size());
    if (h.states.size() != h.actions.size() + 1 || h.delays.size() != h.states.size()) {
        std::ostringstream oss;
        oss << "history shape mismatch: " << h.states.size() << " states, " << h.delays.size()
            << " delays, " << h.actions.size() << " actions (want T+1, T+1, T)";
        throw std::invalid_argument(oss.str());
    }
    for (int s : h.states) check_state(mdp, s, "history state");
    for (int a : h.actions) {
        if (a < 0 || a >= mdp.n_actions) {
            std::ostringstream oss;
            oss << "history action " << a << " outside [0, " << mdp.n_actions << ")";
            throw std::invalid_argument(oss.str());
        }
    }
    const std::span<const int> z(h.delays);
    check_delays(z, m, static_cast<std::int64_t>(h.delays.size()));

    const std::vector<double> zeta = config.delay.iid_probs();
    double prob = mdp.initial[static_cast<std::size_t>(h.states[0])];
    for (int d : h.delays) prob *= zeta[static_cast<std::size_t>(d)];
    if (prob == 0.0) return 0.0;

    for (std::int64_t l = 0; l < steps; ++l) {
        const int a = h.actions[static_cast<std::size_t>(l)];
        const std::int64_t tau = effective_decision_time_for(z, m, l);
        if (tau < 0) {
            if (a != config.default_queue[static_cast<std::size_t>(tau + m)]) return 0.0;
        } else {
            const History hp = prefix_history(h.states, z, h.actions, tau);
            const std::vector<double> probs = policy.action_probs(tau, hp);
            check_distribution(probs, mdp.n_actions);
            prob *= probs[static_cast<std::size_t>(a)];
        }
        prob *= mdp.p(h.states[static_cast<std::size_t>(l)], a,
                      h.states[static_cast<std::size_t>(l + 1)]);
        if (prob == 0.0) return 0.0;
    }
    return prob;
}

void enumerate_fixed_delay_paths(const SedConfig& config, const Policy& policy, int s0,
                                 std::span<const int> z, int depth, const PathVisitor& visit) {
    config.validate();
    check_state(config.mdp, s0, "start state");
    if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
    check_delays(z, config.max_delay(), depth);
    PathWalker walker{config, policy, z, depth, visit, {}, {}};
    walker.states.push_back(s0);
    walker.run(1.0);
}

std::vector<double> process_marginal(const SedConfig& config, const Policy& policy, int s0,
                                     std::span<const int> z, int t) {
    std::vector<double> dist(static_cast<std::size_t>(config.mdp.n_states), 0.0);
    enumerate_fixed_delay_paths(config, policy, s0, z, t,
                                [&](double prob, const std::vector<int>& states,
                                    const std::vector<int>&) {
                                    dist[static_cast<std::size_t>(states.back())] += prob;
                                });
    return dist;
}

double fixed_delay_expected_return(const SedConfig& config, const Policy& policy, int horizon,
                                   std::span<const int> z) {
    double total = 0.0;
    const MdpSpec& mdp = config.mdp;
    for (int s0 = 0; s0 < mdp.n_states; ++s0) {
        const double mu = mdp.initial[static_cast<std::size_t>(s0)];
        if (mu <= 0.0) continue;
        enumerate_fixed_delay_paths(
            config, policy, s0, z, horizon,
            [&](double prob, const std::vector<int>& states, const std::vector<int>& actions) {
                double ret = 0.0;
                double weight = 1.0;
                for (std::size_t l = 0; l < actions.size(); ++l) {
                    ret += weight * mdp.reward(states[l], actions[l]);
                    weight *= mdp.discount;
                }
                total += mu * prob * ret;
            });
    }
    return total;
}

MarkovRandomizedPolicy markov_reduction(const SedConfig& config, const Policy& policy,
                                        int horizon, int s0, std::span<const int> z) {
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    config.validate();
    check_state(config.mdp, s0, "start state");
    const int m = config.max_delay();
    check_delays(z, m, horizon);
    const int n_states = config.mdp.n_states;
    const int n_actions = config.mdp.n_actions;

    // Earliest step executing each decision time within the horizon.
    std::vector<std::int64_t> owner(static_cast<std::size_t>(horizon), -1);
    for (std::int64_t l = 0; l < horizon; ++l) {
        const std::int64_t tau = effective_decision_time_for(z, m, l);
        if (tau >= 0 && owner[static_cast<std::size_t>(tau)] < 0) {
            owner[static_cast<std::size_t>(tau)] = l;
        }
    }

    std::vector<std::vector<std::vector<double>>> rules(
        static_cast<std::size_t>(horizon),
        std::vector<std::vector<double>>(
            static_cast<std::size_t>(n_states),
            std::vector<double>(static_cast<std::size_t>(n_actions), 1.0 / n_actions)));

    for (std::int64_t j = 0; j < horizon; ++j) {
        const std::int64_t l = owner[static_cast<std::size_t>(j)];
        if (l < 0) continue;  // decision time never reached: keep uniform
        // Joint law of (state at decision time j, action executed at step l).
        std::vector<std::vector<double>> joint(
            static_cast<std::size_t>(n_states),
            std::vector<double>(static_cast<std::size_t>(n_actions), 0.0));
        enumerate_fixed_delay_paths(
            config, policy, s0, z, static_cast<int>(l) + 1,
            [&](double prob, const std::vector<int>& states, const std::vector<int>& actions) {
                joint[static_cast<std::size_t>(states[static_cast<std::size_t>(j)])]
                     [static_cast<std::size_t>(actions[static_cast<std::size_t>(l)])] += prob;
            });
        for (int s = 0; s < n_states; ++s) {
            double total = 0.0;
            for (int a = 0; a < n_actions; ++a) total += joint[s][a];
            if (total <= 0.0) continue;  // state unreachable at time j: keep uniform
            for (int a = 0; a < n_actions; ++a) {
                rules[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)]
                     [static_cast<std::size_t>(a)] = joint[s][a] / total;
            }
        }
    }
    return MarkovRandomizedPolicy(std::move(rules), n_actions);
}

} // namespace sedmdp
