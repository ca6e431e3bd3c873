#include "sedmdp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedmdp {

namespace {

History prefix_of(const std::vector<int>& states, const std::vector<int>& delays,
                  const std::vector<int>& actions, std::int64_t j) {
    History h;
    const auto n = static_cast<std::size_t>(j + 1);
    h.states.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(n));
    h.delays.assign(delays.begin(), delays.begin() + static_cast<std::ptrdiff_t>(n));
    h.actions.assign(actions.begin(), actions.begin() + static_cast<std::ptrdiff_t>(j));
    return h;
}

struct HistoryWalker {
    const SedConfig& config;
    const Policy& policy;
    const std::vector<double>& zeta;
    int horizon;
    std::vector<WeightedHistory>& out;

    std::vector<int> states;
    std::vector<int> delays;
    std::vector<int> actions;

    void run(double weight) {
        const auto l = static_cast<std::int64_t>(actions.size());
        if (l == horizon) {
            WeightedHistory wh;
            wh.history.states = states;
            wh.history.delays = delays;
            wh.history.actions = actions;
            wh.probability = trajectory_probability(config, policy, wh.history);
            const double drift = std::abs(wh.probability - weight);
            if (drift > 1e-9 * std::max(1.0, std::abs(weight))) {
                std::ostringstream oss;
                oss << "incremental history weight " << weight
                    << " disagrees with the closed-form probability " << wh.probability;
                throw std::logic_error(oss.str());
            }
            out.push_back(std::move(wh));
            return;
        }
        const int m = config.max_delay();
        const std::int64_t tau = effective_decision_time_for(delays, m, l);
        if (tau < 0) {
            branch_action(weight, config.default_queue[static_cast<std::size_t>(tau + m)], 1.0);
            return;
        }
        const History h = prefix_of(states, delays, actions, tau);
        const std::vector<double> probs = policy.action_probs(tau, h);
        check_distribution(probs, config.mdp.n_actions);
        for (int a = 0; a < config.mdp.n_actions; ++a) {
            const double pa = probs[static_cast<std::size_t>(a)];
            if (pa > 0.0) branch_action(weight, a, pa);
        }
    }

    void branch_action(double weight, int action, double action_prob) {
        const int s = states.back();
        actions.push_back(action);
        for (int next = 0; next < config.mdp.n_states; ++next) {
            const double pt = config.mdp.p(s, action, next);
            if (pt <= 0.0) continue;
            states.push_back(next);
            for (int z = 0; z < static_cast<int>(zeta.size()); ++z) {
                const double pz = zeta[static_cast<std::size_t>(z)];
                if (pz <= 0.0) continue;
                delays.push_back(z);
                run(weight * action_prob * pt * pz);
                delays.pop_back();
            }
            states.pop_back();
        }
        actions.pop_back();
    }
};

} // namespace

std::vector<WeightedHistory> enumerate_histories(const SedConfig& config, const Policy& policy,
                                                 int horizon, const EnumerationBudget& budget) {
    config.validate();
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    const std::vector<double> zeta = config.delay.iid_probs();

    const double per_step = static_cast<double>(config.mdp.n_states) * config.mdp.n_actions *
                            (config.max_delay() + 1);
    const double estimate = std::pow(per_step, horizon);
    if (estimate > static_cast<double>(budget.max_histories)) {
        std::ostringstream oss;
        oss << "enumerating " << horizon << " steps may visit about " << estimate
            << " histories, over the budget of " << budget.max_histories;
        throw ResourceError(oss.str(), estimate, budget.max_histories);
    }

    std::vector<WeightedHistory> out;
    HistoryWalker walker{config, policy, zeta, horizon, out, {}, {}, {}};
    for (int s0 = 0; s0 < config.mdp.n_states; ++s0) {
        const double mu = config.mdp.initial[static_cast<std::size_t>(s0)];
        if (mu <= 0.0) continue;
        for (int z0 = 0; z0 < static_cast<int>(zeta.size()); ++z0) {
            const double pz = zeta[static_cast<std::size_t>(z0)];
            if (pz <= 0.0) continue;
            walker.states.assign(1, s0);
            walker.delays.assign(1, z0);
            walker.actions.clear();
            walker.run(mu * pz);
        }
    }
    return out;
}

ValueSolution value_iteration(const MdpSpec& mdp, double tol, int max_iterations) {
    mdp.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const int n_states = mdp.n_states;
    const int n_actions = mdp.n_actions;
    ValueSolution sol;
    sol.values.assign(static_cast<std::size_t>(n_states), 0.0);
    sol.greedy.assign(static_cast<std::size_t>(n_states), 0);
    std::vector<double> next(static_cast<std::size_t>(n_states), 0.0);
    for (int iter = 1; iter <= max_iterations; ++iter) {
        double residual = 0.0;
        for (int s = 0; s < n_states; ++s) {
            double best = 0.0;
            int best_a = 0;
            for (int a = 0; a < n_actions; ++a) {
                double q = mdp.reward(s, a);
                const auto row = mdp.row(s, a);
                for (int sp = 0; sp < n_states; ++sp) {
                    const double p = row[static_cast<std::size_t>(sp)];
                    if (p > 0.0) q += mdp.discount * p * sol.values[static_cast<std::size_t>(sp)];
                }
                if (a == 0 || q > best) {
                    best = q;
                    best_a = a;
                }
            }
            next[static_cast<std::size_t>(s)] = best;
            sol.greedy[static_cast<std::size_t>(s)] = best_a;
            residual = std::max(residual, std::abs(best - sol.values[static_cast<std::size_t>(s)]));
        }
        sol.values.swap(next);
        sol.iterations = iter;
        sol.residual = residual;
        if (residual <= tol) return sol;
    }
    std::ostringstream oss;
    oss << "value iteration still at residual " << sol.residual << " after " << max_iterations
        << " iterations (tolerance " << tol << ")";
    throw std::runtime_error(oss.str());
}

std::int64_t AugmentedSolution::encode(int s, std::span<const int> queue) const {
    if (s < 0 || s >= n_states) throw std::invalid_argument("state out of range");
    if (static_cast<int>(queue.size()) != max_delay) {
        std::ostringstream oss;
        oss << "queue has " << queue.size() << " actions, expected " << max_delay;
        throw std::invalid_argument(oss.str());
    }
    std::int64_t id = s;
    for (int a : queue) {
        if (a < 0 || a >= n_actions) throw std::invalid_argument("queued action out of range");
        id = id * n_actions + a;
    }
    return id;
}

std::pair<int, std::vector<int>> AugmentedSolution::decode(std::int64_t id) const {
    if (id < 0 || id >= n_augmented) throw std::invalid_argument("augmented id out of range");
    std::vector<int> queue(static_cast<std::size_t>(max_delay), 0);
    for (int i = max_delay - 1; i >= 0; --i) {
        queue[static_cast<std::size_t>(i)] = static_cast<int>(id % n_actions);
        id /= n_actions;
    }
    return {static_cast<int>(id), std::move(queue)};
}

double AugmentedSolution::value_at(int s, std::span<const int> queue) const {
    return values[static_cast<std::size_t>(encode(s, queue))];
}

double AugmentedSolution::initial_value(const MdpSpec& mdp,
                                        std::span<const int> default_queue) const {
    double total = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        const double mu = mdp.initial[static_cast<std::size_t>(s)];
        if (mu > 0.0) total += mu * value_at(s, default_queue);
    }
    return total;
}

AugmentedSolution augmented_vi(const MdpSpec& mdp, int max_delay, double tol,
                               std::int64_t max_augmented_states) {
    mdp.validate();
    if (max_delay < 0) throw std::invalid_argument("max_delay must be nonnegative");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    const double estimate =
        mdp.n_states * std::pow(static_cast<double>(mdp.n_actions), max_delay);
    if (estimate > static_cast<double>(max_augmented_states)) {
        std::ostringstream oss;
        oss << "augmented construction needs about " << estimate
            << " states, over the budget of " << max_augmented_states;
        throw ResourceError(oss.str(), estimate, max_augmented_states);
    }

    AugmentedSolution sol;
    sol.n_states = mdp.n_states;
    sol.n_actions = mdp.n_actions;
    sol.max_delay = max_delay;
    sol.n_augmented = static_cast<std::int64_t>(estimate + 0.5);

    const int n_actions = mdp.n_actions;
    std::int64_t queue_count = 1;
    for (int i = 0; i < max_delay; ++i) queue_count *= n_actions;

    sol.values.assign(static_cast<std::size_t>(sol.n_augmented), 0.0);
    sol.greedy.assign(static_cast<std::size_t>(sol.n_augmented), 0);
    std::vector<double> next_values(sol.values.size(), 0.0);

    // Precompute per-id pieces: the executing action is the queue head; the
    // decided action joins the tail.
    const std::int64_t tail_mod = max_delay > 0 ? queue_count / n_actions : 1;

    const int max_iterations = 1000000;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        double residual = 0.0;
        for (std::int64_t id = 0; id < sol.n_augmented; ++id) {
            const int s = static_cast<int>(id / queue_count);
            const std::int64_t q = id % queue_count;
            // Head digit of the queue (oldest pending action).
            const int head = max_delay > 0 ? static_cast<int>(q / tail_mod) : 0;
            const std::int64_t tail = max_delay > 0 ? (q % tail_mod) * n_actions : 0;
            double best = 0.0;
            int best_b = 0;
            for (int b = 0; b < n_actions; ++b) {
                const int exec = max_delay > 0 ? head : b;
                double q_val = mdp.reward(s, exec);
                const auto row = mdp.row(s, exec);
                const std::int64_t next_queue = max_delay > 0 ? tail + b : 0;
                for (int sp = 0; sp < mdp.n_states; ++sp) {
                    const double p = row[static_cast<std::size_t>(sp)];
                    if (p <= 0.0) continue;
                    const std::int64_t next_id = sp * queue_count + next_queue;
                    q_val += mdp.discount * p * sol.values[static_cast<std::size_t>(next_id)];
                }
                if (b == 0 || q_val > best) {
                    best = q_val;
                    best_b = b;
                }
            }
            next_values[static_cast<std::size_t>(id)] = best;
            sol.greedy[static_cast<std::size_t>(id)] = best_b;
            residual = std::max(residual,
                                std::abs(best - sol.values[static_cast<std::size_t>(id)]));
        }
        sol.values.swap(next_values);
        sol.iterations = iter;
        sol.residual = residual;
        if (residual <= tol) return sol;
    }
    std::ostringstream oss;
    oss << "augmented value iteration still at residual " << sol.residual << " after "
        << max_iterations << " iterations (tolerance " << tol << ")";
    throw std::runtime_error(oss.str());
}

namespace {

// Backward induction over the history tree for deterministic history rules:
// the decision for rule time j binds every later step whose effective
// decision time is j, across the whole subtree below the depth-j node.
struct HistoryTreeSolver {
    const SedConfig& config;
    std::span<const int> z;
    int horizon;
    std::vector<std::int64_t> taus;           // per step
    std::vector<std::uint8_t> rule_needed;    // per decision time

    double value(int l, int s, std::vector<int>& pending) const {
        if (l == horizon) return 0.0;
        if (rule_needed[static_cast<std::size_t>(l)]) {
            double best = 0.0;
            for (int a = 0; a < config.mdp.n_actions; ++a) {
                pending[static_cast<std::size_t>(l)] = a;
                const double v = continue_from(l, s, pending);
                if (a == 0 || v > best) best = v;
            }
            pending[static_cast<std::size_t>(l)] = -1;
            return best;
        }
        return continue_from(l, s, pending);
    }

    double continue_from(int l, int s, std::vector<int>& pending) const {
        const std::int64_t tau = taus[static_cast<std::size_t>(l)];
        int exec;
        if (tau < 0) {
            exec = config.default_queue[static_cast<std::size_t>(tau + config.max_delay())];
        } else {
            exec = pending[static_cast<std::size_t>(tau)];
            if (exec < 0) throw std::logic_error("decision consumed before it was made");
        }
        double total = config.mdp.reward(s, exec);
        const auto row = config.mdp.row(s, exec);
        for (int sp = 0; sp < config.mdp.n_states; ++sp) {
            const double p = row[static_cast<std::size_t>(sp)];
            if (p <= 0.0) continue;
            total += config.mdp.discount * p * value(l + 1, sp, pending);
        }
        return total;
    }
};

} // namespace

PolicyClassValues best_markov_vs_best_history(const SedConfig& config, int horizon,
                                              std::span<const int> z,
                                              std::int64_t max_policies) {
    config.validate();
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    const int m = config.max_delay();
    const int n_states = config.mdp.n_states;
    const int n_actions = config.mdp.n_actions;

    std::vector<std::int64_t> taus(static_cast<std::size_t>(horizon), 0);
    std::vector<std::uint8_t> rule_needed(static_cast<std::size_t>(horizon), 0);
    std::vector<int> decision_times;
    for (int l = 0; l < horizon; ++l) {
        taus[static_cast<std::size_t>(l)] = effective_decision_time_for(z, m, l);
        const std::int64_t tau = taus[static_cast<std::size_t>(l)];
        if (tau >= 0 && !rule_needed[static_cast<std::size_t>(tau)]) {
            rule_needed[static_cast<std::size_t>(tau)] = 1;
            decision_times.push_back(static_cast<int>(tau));
        }
    }
    std::sort(decision_times.begin(), decision_times.end());

    const std::size_t n_cells = decision_times.size() * static_cast<std::size_t>(n_states);
    const double md_estimate = std::pow(static_cast<double>(n_actions),
                                        static_cast<double>(n_cells));
    const double hd_estimate = std::pow(static_cast<double>(n_actions) * n_states,
                                        static_cast<double>(horizon));
    if (md_estimate > static_cast<double>(max_policies) ||
        hd_estimate > static_cast<double>(max_policies)) {
        std::ostringstream oss;
        oss << "policy-class search needs about " << std::max(md_estimate, hd_estimate)
            << " evaluations, over the budget of " << max_policies;
        throw ResourceError(oss.str(), std::max(md_estimate, hd_estimate), max_policies);
    }

    PolicyClassValues result;

    // Exhaustive search over deterministic time-and-state rules: only the
    // reachable decision times matter; every other rule row is irrelevant.
    std::vector<int> assignment(n_cells, 0);
    bool first = true;
    while (true) {
        std::vector<std::vector<int>> choice(
            static_cast<std::size_t>(horizon),
            std::vector<int>(static_cast<std::size_t>(n_states), 0));
        for (std::size_t c = 0; c < n_cells; ++c) {
            const int t = decision_times[c / static_cast<std::size_t>(n_states)];
            const auto s = c % static_cast<std::size_t>(n_states);
            choice[static_cast<std::size_t>(t)][s] = assignment[c];
        }
        MarkovDeterministicPolicy policy(choice, n_actions);
        const double v = fixed_delay_expected_return(config, policy, horizon, z);
        if (first || v > result.best_markov) {
            result.best_markov = v;
            result.markov_choice = std::move(choice);
            first = false;
        }
        // Odometer over the assignment.
        std::size_t c = 0;
        for (; c < n_cells; ++c) {
            if (++assignment[c] < n_actions) break;
            assignment[c] = 0;
        }
        if (c == n_cells) break;
    }
    HistoryTreeSolver solver{config, z, horizon, taus, rule_needed};
    std::vector<int> pending(static_cast<std::size_t>(horizon), -1);
    double hd = 0.0;
    for (int s0 = 0; s0 < n_states; ++s0) {
        const double mu = config.mdp.initial[static_cast<std::size_t>(s0)];
        if (mu > 0.0) hd += mu * solver.value(0, s0, pending);
    }
    result.best_history = hd;
    return result;
}

std::vector<double> monte_carlo_marginal(const SedConfig& config, const Policy& policy, int s0,
                                         std::span<const int> z, int t, std::int64_t n,
                                         std::uint64_t seed) {
    config.validate();
    if (s0 < 0 || s0 >= config.mdp.n_states) {
        throw std::invalid_argument("start state out of range");
    }
    if (t < 0) throw std::invalid_argument("t must be nonnegative");
    if (n < 1) throw std::invalid_argument("need at least one sample");
    const int m = config.max_delay();
    if (static_cast<std::int64_t>(z.size()) < t) {
        std::ostringstream oss;
        oss << "delay sequence has " << z.size() << " entries, need at least " << t;
        throw std::invalid_argument(oss.str());
    }
    for (std::int64_t i = 0; i < t; ++i) {
        if (z[static_cast<std::size_t>(i)] < 0 || z[static_cast<std::size_t>(i)] > m) {
            throw std::invalid_argument("delay outside [0, M]");
        }
    }

    std::vector<double> freq(static_cast<std::size_t>(config.mdp.n_states), 0.0);
    if (t == 0) {
        freq[static_cast<std::size_t>(s0)] = 1.0;
        return freq;
    }
    const RngStream root(seed);
    const int n_actions = config.mdp.n_actions;
    for (std::int64_t rep = 0; rep < n; ++rep) {
        RngStream rng = root.fork("mc/rep=" + std::to_string(rep));
        QueueState queue(config.default_queue, m);
        int s = s0;
        History h;
        h.states.push_back(s0);
        h.delays.push_back(z[0]);
        for (int l = 0; l < t; ++l) {
            const int zl = z[static_cast<std::size_t>(l)];
            const int decided = decide(policy, l, h, n_actions, rng);
            const std::int64_t tau = effective_decision_time(queue, zl);
            const int executed = tau == queue.time() ? decided : queue.action_at(tau);
            queue.push(decided, zl);
            s = sample_next_state(config.mdp, s, executed, rng);
            h.actions.push_back(executed);
            h.states.push_back(s);
            if (l + 1 < t) h.delays.push_back(z[static_cast<std::size_t>(l + 1)]);
        }
        freq[static_cast<std::size_t>(s)] += 1.0;
    }
    for (double& f : freq) f /= static_cast<double>(n);
    return freq;
}

} // namespace sedmdp
