#include "sedmdp/checks.hpp"

#include "sedmdp/envs.hpp"
#include "sedmdp/exact.hpp"
#include "sedmdp/harness.hpp"
#include "sedmdp/oracles.hpp"
#include "sedmdp/planning.hpp"
#include "sedmdp/queue.hpp"
#include "sedmdp/sed_env.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace sedmdp {

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

CheckResult make_check(std::string name, bool passed, std::string detail) {
    CheckResult check;
    check.name = std::move(name);
    check.passed = passed;
    check.detail = std::move(detail);
    return check;
}

std::string dev(double measured, double tolerated) {
    return "measured " + format_compact(measured) + ", tolerated " + format_compact(tolerated);
}

std::string join_ints(const std::vector<int>& values) {
    std::ostringstream oss;
    oss << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) oss << ' ';
        oss << values[i];
    }
    oss << ']';
    return oss.str();
}

std::string history_key(const std::vector<int>& states, const std::vector<int>& delays,
                        const std::vector<int>& actions) {
    std::ostringstream oss;
    for (int s : states) oss << s << ',';
    oss << '|';
    for (int z : delays) oss << z << ',';
    oss << '|';
    for (int a : actions) oss << a << ',';
    return oss.str();
}

} // namespace

Battery check_queues() {
    Battery battery;
    battery.suite = "queues";

    // Five decisions under the worked delay window; decided action values
    // equal their decision times so the expected queues read directly.
    const int max_delay = 5;
    const std::vector<int> delays = {5, 4, 4, 4, 3};
    QueueState queue(std::vector<int>{100, 101, 102, 103, 104}, max_delay);

    std::vector<std::int64_t> earliest;
    std::vector<bool> default_executed;
    for (int t = 0; t < 5; ++t) {
        const int z = delays[static_cast<std::size_t>(t)];
        earliest.push_back(earliest_execution_time(t, z, max_delay));
        const std::int64_t tau = effective_decision_time(queue, z);
        default_executed.push_back(tau == t - max_delay);
        queue.push(t, z);
    }
    const std::vector<std::int64_t> expected_earliest = {5, 5, 6, 7, 7};
    battery.checks.push_back(make_check(
        "earliest execution times e_0..e_4", earliest == expected_earliest,
        "expected [5 5 6 7 7], got [" + std::to_string(earliest[0]) + ' ' +
            std::to_string(earliest[1]) + ' ' + std::to_string(earliest[2]) + ' ' +
            std::to_string(earliest[3]) + ' ' + std::to_string(earliest[4]) + ']'));
    battery.checks.push_back(make_check(
        "defaults execute at t=0..4",
        std::all_of(default_executed.begin(), default_executed.end(), [](bool b) { return b; }),
        "every early step resolves to its virtual slot"));

    const std::vector<std::vector<int>> expected_pending = {
        {}, {1}, {1, 2}, {1, 2, 4}, {1, 2, 4, 4}, {1, 2, 4, 4, 4}};
    for (int z5 = 5; z5 >= 0; --z5) {
        const std::vector<int> pending = resolve_pending_queue(queue, z5);
        const std::vector<int>& expected = expected_pending[static_cast<std::size_t>(z5)];
        battery.checks.push_back(make_check(
            "pending queue at t=5 with z_5=" + std::to_string(z5), pending == expected,
            "expected " + join_ints(expected) + ", got " + join_ints(pending)));
    }

    bool tau_ok = true;
    std::ostringstream tau_detail;
    for (int z5 = 0; z5 <= 5; ++z5) {
        const std::int64_t tau = effective_decision_time(queue, z5);
        const std::int64_t expected = z5 == 0 ? 5 : 1;
        if (tau != expected) tau_ok = false;
        tau_detail << "z_5=" << z5 << "->" << tau << ' ';
    }
    battery.checks.push_back(make_check("effective decision time at t=5 (1 if z_5>0, else 5)",
                                        tau_ok, tau_detail.str()));
    return battery;
}

// Two states, two actions, deterministic dynamics: action 0 stays, action 1
// flips. Concentrating the transition kernel keeps every horizon-4 history
// above ~1e-3 probability, so each expected count at N=1e5 is large enough
// for the per-history 3-sigma bound to be a meaningful normal-regime test;
// a stochastic kernel scatters the mass over tens of thousands of histories
// whose expected counts are far below one, where single stray samples blow
// past any z-score threshold even for a correct sampler.
MdpSpec flip_two_state() {
    MdpSpec mdp;
    mdp.name = "flip";
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.transitions = {1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0};
    mdp.rewards = {0.0, 0.0, 0.0, 1.0};
    mdp.initial = {1.0, 0.0};
    mdp.discount = 0.9;
    mdp.terminal.assign(2, 0);
    return mdp;
}

Battery check_theorem1(std::uint64_t seed) {
    Battery battery;
    battery.suite = "theorem1";
    const UniformPolicy uniform(2);
    const int horizon = 4;

    const auto enumerate_into = [&](const SedConfig& config, std::map<std::string, double>& out) {
        double mass = 0.0;
        for (const WeightedHistory& wh : enumerate_histories(config, uniform, horizon)) {
            mass += wh.probability;
            out[history_key(wh.history.states, wh.history.delays, wh.history.actions)] =
                wh.probability;
        }
        return mass;
    };

    const SedConfig rich{tiny_two_state(), DelayProcess::iid({0.4, 0.3, 0.3}), {0, 0}};
    std::map<std::string, double> rich_exact;
    const double rich_mass = enumerate_into(rich, rich_exact);
    battery.checks.push_back(make_check("enumerated history mass = 1 (stochastic kernel)",
                                        std::abs(rich_mass - 1.0) <= 1e-12,
                                        dev(std::abs(rich_mass - 1.0), 1e-12)));

    // The frequency comparison runs on a concentrated instance: all the delay
    // phenomena (defaults, overridden decisions, several steps sharing one
    // decision time) survive, but each history keeps an expected count in the
    // hundreds.
    const SedConfig config{flip_two_state(), DelayProcess::iid({0.5, 0.0, 0.5}), {0, 0}};
    std::map<std::string, double> exact;
    const double mass = enumerate_into(config, exact);
    battery.checks.push_back(make_check("enumerated history mass = 1 (deterministic kernel)",
                                        std::abs(mass - 1.0) <= 1e-12,
                                        dev(std::abs(mass - 1.0), 1e-12)));

    // Sample the process measure directly: the action at each step is a fresh
    // draw from the rule at that step's effective decision time, applied to
    // the history up to that decision time. (The live environment instead
    // actuates one realized decision per decision time, which induces the
    // same per-step marginals but correlates steps that share a decision
    // time; the history formula under test factors per step.)
    const std::int64_t n = 100000;
    const std::vector<double> zeta = config.delay.iid_probs();
    const MdpSpec& mdp = config.mdp;
    const int max_delay = config.max_delay();
    RngStream root(seed);
    std::map<std::string, std::int64_t> counts;
    for (std::int64_t rep = 0; rep < n; ++rep) {
        RngStream rng = root.fork("rep=" + std::to_string(rep));
        std::vector<int> states = {rng.categorical(mdp.initial)};
        std::vector<int> zs = {rng.categorical(zeta)};
        std::vector<int> actions;
        for (int l = 0; l < horizon; ++l) {
            const std::int64_t tau = effective_decision_time_for(zs, max_delay, l);
            int a;
            if (tau < 0) {
                a = config.default_queue[static_cast<std::size_t>(tau + max_delay)];
            } else {
                History prefix;
                prefix.states.assign(states.begin(), states.begin() + tau + 1);
                prefix.delays.assign(zs.begin(), zs.begin() + tau + 1);
                prefix.actions.assign(actions.begin(), actions.begin() + tau);
                a = decide(uniform, tau, prefix, mdp.n_actions, rng);
            }
            actions.push_back(a);
            states.push_back(rng.categorical(mdp.row(states.back(), a)));
            zs.push_back(rng.categorical(zeta));
        }
        ++counts[history_key(states, zs, actions)];
    }

    bool covered = true;
    for (const auto& [key, count] : counts) {
        (void)count;
        if (!exact.count(key)) covered = false;
    }
    battery.checks.push_back(make_check("every simulated history has positive exact probability",
                                        covered,
                                        std::to_string(counts.size()) + " distinct histories seen, " +
                                            std::to_string(exact.size()) + " enumerated"));

    std::int64_t min_count = n;
    double max_z = 0.0;
    int violations = 0;
    for (const auto& [key, p] : exact) {
        const auto it = counts.find(key);
        const std::int64_t count = it == counts.end() ? 0 : it->second;
        min_count = std::min(min_count, count);
        const double freq = static_cast<double>(count) / static_cast<double>(n);
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
        const double zscore = sigma > 0.0 ? std::abs(freq - p) / sigma : 0.0;
        max_z = std::max(max_z, zscore);
        if (zscore > 3.0) ++violations;
    }
    battery.checks.push_back(
        make_check("every enumerated history simulated at least once",
                   min_count > 0, "smallest count " + std::to_string(min_count)));
    battery.checks.push_back(
        make_check("every history frequency within 3 standard errors (N=100000)",
                   violations == 0,
                   "max z-score " + format_compact(max_z) + " over " +
                       std::to_string(exact.size()) + " histories, tolerated 3; violations " +
                       std::to_string(violations)));
    return battery;
}

Battery check_theorem2() {
    Battery battery;
    battery.suite = "theorem2";

    const SedConfig config{tiny_two_state(), DelayProcess::iid({0.5, 0.5}), {0}};
    const int horizon = 3;
    const std::vector<std::vector<int>> realizations = {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};

    struct NamedPolicy {
        const char* name;
        CallbackPolicy policy;
    };
    const NamedPolicy readers[] = {
        {"agreement reader", CallbackPolicy([](std::int64_t, const History& h) {
             if (h.states.front() == h.states.back()) return std::vector<double>{0.9, 0.1};
             return std::vector<double>{0.3, 0.7};
         })},
        {"mixture reader", CallbackPolicy([](std::int64_t, const History& h) {
             const double p1 = 0.15 + 0.5 * (h.states.back() == 1 ? 1.0 : 0.0) +
                               0.2 * (h.states.front() == 1 ? 1.0 : 0.0);
             return std::vector<double>{1.0 - p1, p1};
         })},
        {"xor reader", CallbackPolicy([](std::int64_t, const History& h) {
             if (h.states.front() == h.states.back()) return std::vector<double>{0.15, 0.85};
             return std::vector<double>{0.7, 0.3};
         })}};

    for (const NamedPolicy& reader : readers) {
        double worst = 0.0;
        for (const std::vector<int>& z : realizations) {
            for (int s0 = 0; s0 < 2; ++s0) {
                const MarkovRandomizedPolicy reduced =
                    markov_reduction(config, reader.policy, horizon, s0, z);
                for (int t = 0; t <= horizon; ++t) {
                    const std::vector<double> a =
                        process_marginal(config, reader.policy, s0, z, t);
                    const std::vector<double> b = process_marginal(config, reduced, s0, z, t);
                    for (std::size_t s = 0; s < a.size(); ++s) {
                        worst = std::max(worst, std::abs(a[s] - b[s]));
                    }
                }
            }
        }
        battery.checks.push_back(make_check(
            std::string("reduction preserves marginals (") + reader.name + ")", worst <= 1e-10,
            dev(worst, 1e-10)));
    }

    double worst_gap = 0.0;
    double worst_order = 0.0;
    for (const std::vector<int>& z : realizations) {
        const PolicyClassValues values = best_markov_vs_best_history(config, horizon, z);
        worst_gap = std::max(worst_gap, std::abs(values.best_history - values.best_markov));
        worst_order = std::max(worst_order, values.best_markov - values.best_history);
    }
    battery.checks.push_back(make_check("best time-and-state value equals best history value",
                                        worst_gap <= 1e-10, dev(worst_gap, 1e-10)));
    battery.checks.push_back(make_check("history planning never loses to time-and-state rules",
                                        worst_order <= 1e-12, dev(worst_order, 1e-12)));
    return battery;
}

Battery check_planner(std::uint64_t seed) {
    Battery battery;
    battery.suite = "planner";

    const MdpSpec chain = make_chain(5, 0.1, 0.9);

    const ValueSolution flat = value_iteration(chain, 1e-12);
    const AugmentedSolution zero_delay = augmented_vi(chain, 0, 1e-12);
    double worst_state = 0.0;
    for (int s = 0; s < chain.n_states; ++s) {
        worst_state = std::max(worst_state,
                               std::abs(zero_delay.values[static_cast<std::size_t>(s)] -
                                        flat.values[static_cast<std::size_t>(s)]));
    }
    battery.checks.push_back(make_check("zero-delay augmented solution equals value iteration",
                                        worst_state <= 1e-9, dev(worst_state, 1e-9)));

    const int max_delay = 2;
    const std::vector<int> defaults = {1, 1};
    const AugmentedSolution oracle = augmented_vi(chain, max_delay);
    const double target = oracle.initial_value(chain, defaults);

    MctsConfig planner;
    planner.mode = MctsMode::ExpectimaxToDepth;
    planner.rollout_depth = 16;
    planner.discount = chain.discount;

    SedEnv env(SedConfig{chain, DelayProcess::constant(max_delay), defaults});
    AgentState agent(AgentKind::DelayedMcts, ForwardModel::exact(chain), planner, {}, defaults,
                     max_delay);

    const int episodes = 200;
    RngStream root(seed);
    double sum = 0.0;
    for (int episode = 0; episode < episodes; ++episode) {
        RngStream rng = root.fork("episode=" + std::to_string(episode));
        env.reset(rng);
        std::vector<int> queue = agent.plan_initial_queue(env.state(), rng);
        env.install_default_queue(queue);
        agent.begin_episode(queue);
        EpisodeRecord record;
        int t = 0;
        while (!env.done() && t < 300) {
            const int s = env.state();
            const int z = env.delay();
            const int decided = agent.act(s, z, rng, env.time());
            const StepOutcome out = env.step(decided, rng);
            StepRecord sr;
            sr.t = t;
            sr.state = s;
            sr.delay = z;
            sr.decided_action = decided;
            sr.executed_action = out.executed_action;
            sr.decision_time = out.decision_time;
            sr.reward = out.reward;
            record.steps.push_back(sr);
            ++t;
        }
        sum += record.discounted_return(chain.discount);
    }
    const double mean = sum / static_cast<double>(episodes);
    const double relative = std::abs(mean - target) / target;
    battery.checks.push_back(
        make_check("delayed planner mean discounted return within 5% of the optimal value",
                   relative <= 0.05,
                   "oracle " + format_compact(target) + ", planner mean " + format_compact(mean) +
                       "; " + dev(relative, 0.05)));
    return battery;
}

Battery check_walk(std::uint64_t seed) {
    Battery battery;
    battery.suite = "walk";

    const int max_delay = 5;
    DelayProcess walk = DelayProcess::random_walk(max_delay, 0.2, 0.2);
    RngStream rng(seed);

    int previous = walk.sample(rng);  // first emission pins the top value
    battery.checks.push_back(make_check("fresh walk starts at M",
                                        previous == max_delay,
                                        "expected 5, got " + std::to_string(previous)));

    const std::int64_t interior_target = 100000;
    std::int64_t interior = 0;
    std::int64_t ups = 0;
    std::int64_t downs = 0;
    bool increments_ok = true;
    bool bounds_ok = true;
    while (interior < interior_target) {
        const int value = walk.sample(rng);
        const int d = value - previous;
        if (d < -1 || d > 1) increments_ok = false;
        if (value < 0 || value > max_delay) bounds_ok = false;
        if (previous > 0 && previous < max_delay) {
            ++interior;
            if (d == 1) ++ups;
            if (d == -1) ++downs;
        }
        previous = value;
    }
    const double up_freq = static_cast<double>(ups) / static_cast<double>(interior_target);
    const double down_freq = static_cast<double>(downs) / static_cast<double>(interior_target);
    battery.checks.push_back(
        make_check("every increment in {-1, 0, +1}", increments_ok, "scanned all transitions"));
    battery.checks.push_back(
        make_check("values stay inside [0, M]", bounds_ok, "scanned all transitions"));
    battery.checks.push_back(make_check("interior up-move frequency = 0.2 +- 0.01",
                                        std::abs(up_freq - 0.2) <= 0.01,
                                        dev(std::abs(up_freq - 0.2), 0.01)));
    battery.checks.push_back(make_check("interior down-move frequency = 0.2 +- 0.01",
                                        std::abs(down_freq - 0.2) <= 0.01,
                                        dev(std::abs(down_freq - 0.2), 0.01)));

    // Carryover across episode boundaries: with state kept, the first value
    // of a new episode usually leaves the top; with a fresh reset it cannot.
    DelayProcess carrier = DelayProcess::random_walk(max_delay, 0.2, 0.2);
    RngStream rng2 = rng.fork("carryover");
    int carried_off_top = 0;
    for (int episode = 0; episode < 100; ++episode) {
        for (int i = 0; i < 5; ++i) carrier.sample(rng2);  // episode body
        if (carrier.sample(rng2) != max_delay) ++carried_off_top;  // first of next episode
    }
    DelayProcess fresh = DelayProcess::random_walk(max_delay, 0.2, 0.2);
    int fresh_at_top = 0;
    for (int episode = 0; episode < 100; ++episode) {
        for (int i = 0; i < 5; ++i) fresh.sample(rng2);
        fresh.reset_fresh();
        if (fresh.sample(rng2) == max_delay) ++fresh_at_top;
    }
    battery.checks.push_back(make_check(
        "walk state carries across episode resets", carried_off_top > 0,
        std::to_string(carried_off_top) + "/100 first post-reset values left the top"));
    battery.checks.push_back(make_check(
        "fresh resets always restart at M", fresh_at_top == 100,
        std::to_string(fresh_at_top) + "/100 restarted at the top"));
    return battery;
}

Battery run_battery(const std::string& suite, std::uint64_t seed) {
    if (suite == "queues") return check_queues();
    if (suite == "theorem1") return check_theorem1(seed ? seed : kHistoryBatterySeed);
    if (suite == "theorem2") return check_theorem2();
    if (suite == "planner") return check_planner(seed ? seed : kPlannerBatterySeed);
    if (suite == "walk") return check_walk(seed ? seed : kWalkBatterySeed);
    throw std::invalid_argument("unknown verify suite '" + suite +
                                "' (expected queues, theorem1, theorem2, planner, or walk)");
}

void print_battery(const Battery& battery, std::ostream& os) {
    for (const CheckResult& check : battery.checks) {
        os << (check.passed ? "[ OK ] " : "[FAIL] ") << check.name << ": " << check.detail
           << '\n';
    }
}

} // namespace sedmdp
