#include "sedmdp/planning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sedmdp {

namespace {

[[noreturn]] void out_of_range_fail(const char* what, int v, int n) {
    std::ostringstream oss;
    oss << what << " " << v << " outside [0, " << n << ")";
    throw std::invalid_argument(oss.str());
}

} // namespace

ForwardModel ForwardModel::exact(MdpSpec mdp, PredictionMode mode) {
    mdp.validate();
    ForwardModel m;
    m.exact_ = true;
    m.n_states_ = mdp.n_states;
    m.n_actions_ = mdp.n_actions;
    m.mdp_ = std::move(mdp);
    m.mode_ = mode;
    return m;
}

ForwardModel ForwardModel::tabular(int n_states, int n_actions, double alpha,
                                   PredictionMode mode) {
    if (n_states < 1 || n_actions < 1) {
        throw std::invalid_argument("tabular model needs at least one state and action");
    }
    if (alpha < 0.0) {
        throw std::invalid_argument("smoothing alpha must be nonnegative, got " +
                                    std::to_string(alpha));
    }
    ForwardModel m;
    m.exact_ = false;
    m.n_states_ = n_states;
    m.n_actions_ = n_actions;
    m.alpha_ = alpha;
    m.mode_ = mode;
    const auto ns = static_cast<std::size_t>(n_states);
    const auto na = static_cast<std::size_t>(n_actions);
    m.counts_.assign(ns * na * ns, 0);
    m.pair_count_.assign(ns * na, 0);
    m.reward_sum_.assign(ns * na, 0.0);
    return m;
}

void ForwardModel::check_pair(int s, int a) const {
    if (s < 0 || s >= n_states_) out_of_range_fail("state", s, n_states_);
    if (a < 0 || a >= n_actions_) out_of_range_fail("action", a, n_actions_);
}

std::vector<double> ForwardModel::next_state_probs(int s, int a) const {
    check_pair(s, a);
    if (exact_) {
        auto row = mdp_.row(s, a);
        return {row.begin(), row.end()};
    }
    const auto base = (static_cast<std::size_t>(s) * n_actions_ + a) * n_states_;
    const double denom =
        static_cast<double>(pair_count_[static_cast<std::size_t>(s) * n_actions_ + a]) +
        alpha_ * n_states_;
    std::vector<double> probs(static_cast<std::size_t>(n_states_), 0.0);
    if (denom <= 0.0) {
        // Never observed and no smoothing mass: stay a proper distribution.
        std::fill(probs.begin(), probs.end(), 1.0 / n_states_);
        return probs;
    }
    for (int next = 0; next < n_states_; ++next) {
        probs[static_cast<std::size_t>(next)] =
            (static_cast<double>(counts_[base + static_cast<std::size_t>(next)]) + alpha_) /
            denom;
    }
    return probs;
}

double ForwardModel::expected_reward(int s, int a) const {
    check_pair(s, a);
    if (exact_) return mdp_.reward(s, a);
    const auto idx = static_cast<std::size_t>(s) * n_actions_ + a;
    if (pair_count_[idx] == 0) return 0.0;
    return reward_sum_[idx] / static_cast<double>(pair_count_[idx]);
}

bool ForwardModel::is_terminal(int s) const {
    if (s < 0 || s >= n_states_) out_of_range_fail("state", s, n_states_);
    return exact_ && mdp_.is_terminal(s);
}

int ForwardModel::predict(int s, int a, RngStream& rng) const {
    std::vector<double> probs = next_state_probs(s, a);
    double live = 0.0;
    for (int next = 0; next < n_states_; ++next) {
        if (!is_terminal(next)) live += probs[static_cast<std::size_t>(next)];
    }
    if (live > 0.0) {
        for (int next = 0; next < n_states_; ++next) {
            auto& p = probs[static_cast<std::size_t>(next)];
            p = is_terminal(next) ? 0.0 : p / live;
        }
    }
    if (mode_ == PredictionMode::Sample) return rng.categorical(probs);
    int best = 0;
    for (int next = 1; next < n_states_; ++next) {
        if (probs[static_cast<std::size_t>(next)] > probs[static_cast<std::size_t>(best)]) {
            best = next;
        }
    }
    return best;
}

void ForwardModel::observe(int s, int a, double r, int next) {
    if (exact_) throw std::logic_error("exact forward model cannot accumulate observations");
    check_pair(s, a);
    if (next < 0 || next >= n_states_) out_of_range_fail("next state", next, n_states_);
    counts_[(static_cast<std::size_t>(s) * n_actions_ + a) * n_states_ +
            static_cast<std::size_t>(next)] += 1;
    pair_count_[static_cast<std::size_t>(s) * n_actions_ + a] += 1;
    reward_sum_[static_cast<std::size_t>(s) * n_actions_ + a] += r;
}

ForwardModel learn_model(const std::vector<CorrectedTransition>& transitions, int n_states,
                         int n_actions, double alpha, PredictionMode mode) {
    ForwardModel m = ForwardModel::tabular(n_states, n_actions, alpha, mode);
    for (const CorrectedTransition& t : transitions) m.observe(t.s, t.a, t.r, t.next);
    return m;
}

int predict_future_state(int s, std::span<const int> pending, const ForwardModel& model,
                         RngStream& rng) {
    if (s < 0 || s >= model.n_states()) out_of_range_fail("state", s, model.n_states());
    for (int a : pending) s = model.predict(s, a, rng);
    return s;
}

void MctsConfig::validate() const {
    if (n_simulations < 1) {
        throw std::invalid_argument("n_simulations must be at least 1, got " +
                                    std::to_string(n_simulations));
    }
    if (rollout_depth < 0) {
        throw std::invalid_argument("rollout_depth must be nonnegative, got " +
                                    std::to_string(rollout_depth));
    }
    if (!(uct_c >= 0.0)) throw std::invalid_argument("uct_c must be nonnegative");
    if (!(discount >= 0.0 && discount < 1.0)) {
        throw std::invalid_argument("planner discount must be in [0, 1)");
    }
}

namespace {

struct UctNode {
    int state = 0;
    int depth = 0;
    std::vector<int> n_a;
    std::vector<double> w_a;
    std::map<std::pair<int, int>, std::size_t> children;  // (action, next) -> node
};

double uniform_rollout(const ForwardModel& model, int s, int steps, double discount,
                       RngStream& rng) {
    double total = 0.0;
    double weight = 1.0;
    for (int k = 0; k < steps; ++k) {
        const int a = rng.uniform_int(model.n_actions());
        total += weight * model.expected_reward(s, a);
        s = rng.categorical(model.next_state_probs(s, a));
        weight *= discount;
    }
    return total;
}

double uct_simulate(std::vector<UctNode>& nodes, std::size_t idx, const ForwardModel& model,
                    const MctsConfig& config, RngStream& rng) {
    if (nodes[idx].depth == config.rollout_depth) return 0.0;
    const int n_actions = model.n_actions();

    int chosen = -1;
    {
        const UctNode& node = nodes[idx];
        for (int a = 0; a < n_actions; ++a) {
            if (node.n_a[static_cast<std::size_t>(a)] == 0) {
                chosen = a;
                break;
            }
        }
        if (chosen < 0) {
            int total = 0;
            for (int n : node.n_a) total += n;
            double best = 0.0;
            for (int a = 0; a < n_actions; ++a) {
                const auto ai = static_cast<std::size_t>(a);
                const double exploit = node.w_a[ai] / node.n_a[ai];
                const double explore = config.uct_c * std::sqrt(std::log(static_cast<double>(total)) /
                                                                node.n_a[ai]);
                const double ucb = exploit + explore;
                if (chosen < 0 || ucb > best) {
                    chosen = a;
                    best = ucb;
                }
            }
        }
    }

    const int s = nodes[idx].state;
    const double r = model.expected_reward(s, chosen);
    const int next = rng.categorical(model.next_state_probs(s, chosen));

    double tail;
    const auto key = std::make_pair(chosen, next);
    auto it = nodes[idx].children.find(key);
    if (it == nodes[idx].children.end()) {
        UctNode child;
        child.state = next;
        child.depth = nodes[idx].depth + 1;
        child.n_a.assign(static_cast<std::size_t>(n_actions), 0);
        child.w_a.assign(static_cast<std::size_t>(n_actions), 0.0);
        nodes.push_back(std::move(child));
        nodes[idx].children.emplace(key, nodes.size() - 1);
        tail = uniform_rollout(model, next, config.rollout_depth - (nodes[idx].depth + 1),
                               config.discount, rng);
    } else {
        tail = uct_simulate(nodes, it->second, model, config, rng);
    }

    const double value = r + config.discount * tail;
    UctNode& node = nodes[idx];
    node.n_a[static_cast<std::size_t>(chosen)] += 1;
    node.w_a[static_cast<std::size_t>(chosen)] += value;
    return value;
}

// Root action values against precomputed depth-limited state values.
PlanResult plan_from_values(const std::vector<double>& values, const ForwardModel& model, int s,
                            int depth, double discount) {
    const int n_actions = model.n_actions();
    const int n_states = model.n_states();
    PlanResult result;
    result.q_values.assign(static_cast<std::size_t>(n_actions), 0.0);
    if (depth > 0) {
        const std::size_t below = static_cast<std::size_t>(depth - 1) * n_states;
        for (int a = 0; a < n_actions; ++a) {
            double q = model.expected_reward(s, a);
            const std::vector<double> probs = model.next_state_probs(s, a);
            double future = 0.0;
            for (int next = 0; next < n_states; ++next) {
                future += probs[static_cast<std::size_t>(next)] *
                          values[below + static_cast<std::size_t>(next)];
            }
            result.q_values[static_cast<std::size_t>(a)] = q + discount * future;
        }
    }
    result.action = 0;
    for (int a = 1; a < n_actions; ++a) {
        if (result.q_values[static_cast<std::size_t>(a)] >
            result.q_values[static_cast<std::size_t>(result.action)]) {
            result.action = a;
        }
    }
    result.visit_probs.assign(static_cast<std::size_t>(n_actions), 0.0);
    result.visit_probs[static_cast<std::size_t>(result.action)] = 1.0;
    return result;
}

} // namespace

std::vector<double> expectimax_values(const ForwardModel& model, int depth, double discount) {
    if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
    const int n_states = model.n_states();
    const int n_actions = model.n_actions();
    std::vector<double> values(static_cast<std::size_t>(depth + 1) * n_states, 0.0);
    for (int d = 1; d <= depth; ++d) {
        const std::size_t here = static_cast<std::size_t>(d) * n_states;
        const std::size_t below = static_cast<std::size_t>(d - 1) * n_states;
        for (int s = 0; s < n_states; ++s) {
            double best = 0.0;
            for (int a = 0; a < n_actions; ++a) {
                double q = model.expected_reward(s, a);
                const std::vector<double> probs = model.next_state_probs(s, a);
                double future = 0.0;
                for (int next = 0; next < n_states; ++next) {
                    future += probs[static_cast<std::size_t>(next)] *
                              values[below + static_cast<std::size_t>(next)];
                }
                q += discount * future;
                if (a == 0 || q > best) best = q;
            }
            values[here + static_cast<std::size_t>(s)] = best;
        }
    }
    return values;
}

PlanResult mcts_plan(int s, const ForwardModel& model, const MctsConfig& config,
                     RngStream& rng) {
    config.validate();
    if (s < 0 || s >= model.n_states()) out_of_range_fail("state", s, model.n_states());

    if (config.mode == MctsMode::ExpectimaxToDepth) {
        const std::vector<double> values =
            expectimax_values(model, config.rollout_depth, config.discount);
        return plan_from_values(values, model, s, config.rollout_depth, config.discount);
    }

    const int n_actions = model.n_actions();
    std::vector<UctNode> nodes;
    UctNode root;
    root.state = s;
    root.depth = 0;
    root.n_a.assign(static_cast<std::size_t>(n_actions), 0);
    root.w_a.assign(static_cast<std::size_t>(n_actions), 0.0);
    nodes.push_back(std::move(root));
    for (int i = 0; i < config.n_simulations; ++i) uct_simulate(nodes, 0, model, config, rng);

    PlanResult result;
    result.visit_probs.assign(static_cast<std::size_t>(n_actions), 0.0);
    result.q_values.assign(static_cast<std::size_t>(n_actions), 0.0);
    int total = 0;
    for (int n : nodes[0].n_a) total += n;
    for (int a = 0; a < n_actions; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        if (total > 0) {
            result.visit_probs[ai] = static_cast<double>(nodes[0].n_a[ai]) / total;
        }
        if (nodes[0].n_a[ai] > 0) result.q_values[ai] = nodes[0].w_a[ai] / nodes[0].n_a[ai];
    }
    result.action = 0;
    for (int a = 1; a < n_actions; ++a) {
        if (nodes[0].n_a[static_cast<std::size_t>(a)] >
            nodes[0].n_a[static_cast<std::size_t>(result.action)]) {
            result.action = a;
        }
    }
    return result;
}

std::vector<int> bootstrap_initial_queue(int s0, const ForwardModel& model,
                                         const MctsConfig& config, int max_delay,
                                         RngStream& rng) {
    if (max_delay < 0) throw std::invalid_argument("max_delay must be nonnegative");
    std::vector<int> actions;
    actions.reserve(static_cast<std::size_t>(max_delay));
    int s = s0;
    for (int i = 0; i < max_delay; ++i) {
        const int a = mcts_plan(s, model, config, rng).action;
        actions.push_back(a);
        s = model.predict(s, a, rng);
    }
    return actions;
}

std::vector<CorrectedTransition> postprocess_episode(const EpisodeRecord& record,
                                                     std::span<const int> delays,
                                                     const std::vector<int>& default_queue,
                                                     int max_delay) {
    if (delays.size() != record.steps.size()) {
        std::ostringstream oss;
        oss << "episode has " << record.steps.size() << " steps but " << delays.size()
            << " delays";
        throw std::invalid_argument(oss.str());
    }
    QueueState queue(default_queue, max_delay);
    std::vector<CorrectedTransition> out;
    out.reserve(record.steps.size());
    for (std::size_t i = 0; i < record.steps.size(); ++i) {
        const StepRecord& step = record.steps[i];
        const int z = delays[i];
        if (z != step.delay) {
            std::ostringstream oss;
            oss << "delay sequence disagrees with the record at step " << i << ": " << z
                << " vs " << step.delay;
            throw std::invalid_argument(oss.str());
        }
        const std::int64_t tau = effective_decision_time(queue, z);
        const int executed = tau == queue.time() ? step.decided_action : queue.action_at(tau);
        queue.push(step.decided_action, z);
        if (executed != step.executed_action) {
            std::ostringstream oss;
            oss << "recomputed executed action " << executed << " at step " << i
                << " disagrees with the recorded " << step.executed_action;
            throw std::logic_error(oss.str());
        }
        CorrectedTransition t;
        t.s = step.state;
        t.a = executed;
        t.r = step.reward;
        t.next = i + 1 < record.steps.size() ? record.steps[i + 1].state : record.final_state;
        out.push_back(t);
    }
    return out;
}

AgentKind agent_kind_from_string(const std::string& name) {
    if (name == "delayed-mcts") return AgentKind::DelayedMcts;
    if (name == "oblivious-mcts") return AgentKind::ObliviousMcts;
    if (name == "delayed-q") return AgentKind::DelayedQ;
    if (name == "oblivious-q") return AgentKind::ObliviousQ;
    throw std::invalid_argument(
        "unknown agent \"" + name +
        "\": expected delayed-mcts, oblivious-mcts, delayed-q, or oblivious-q");
}

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::DelayedMcts: return "delayed-mcts";
        case AgentKind::ObliviousMcts: return "oblivious-mcts";
        case AgentKind::DelayedQ: return "delayed-q";
        case AgentKind::ObliviousQ: return "oblivious-q";
    }
    throw std::logic_error("unreachable agent kind");
}

AgentState::AgentState(AgentKind kind, ForwardModel model, MctsConfig planner,
                       QLearningConfig qlearn, std::vector<int> default_queue, int max_delay)
    : kind_(kind), model_(std::move(model)), planner_(planner), qlearn_(qlearn),
      default_queue_(std::move(default_queue)), max_delay_(max_delay),
      queue_(default_queue_, max_delay_) {
    planner_.validate();
    if (!(qlearn_.learning_rate > 0.0 && qlearn_.learning_rate <= 1.0)) {
        throw std::invalid_argument("learning rate must be in (0, 1]");
    }
    if (!(qlearn_.epsilon >= 0.0 && qlearn_.epsilon <= 1.0)) {
        throw std::invalid_argument("epsilon must be in [0, 1]");
    }
    q_table_.assign(static_cast<std::size_t>(model_.n_states()) * model_.n_actions(), 0.0);
}

void AgentState::begin_episode(const std::vector<int>& defaults) {
    default_queue_ = defaults;
    queue_ = QueueState(default_queue_, max_delay_);
}

std::vector<int> AgentState::plan_initial_queue(int s0, RngStream& rng) {
    std::vector<int> actions;
    actions.reserve(static_cast<std::size_t>(max_delay_));
    int s = s0;
    for (int i = 0; i < max_delay_; ++i) {
        const int a = plan(s, rng, /*explore=*/false);
        actions.push_back(a);
        s = model_.predict(s, a, rng);
    }
    return actions;
}

int AgentState::act(int s, int z, RngStream& rng, std::int64_t env_time) {
    if (env_time >= 0 && queue_.time() != env_time) {
        std::ostringstream oss;
        oss << "agent queue at time " << queue_.time() << " but environment at " << env_time
            << ": queues desynchronized";
        throw std::logic_error(oss.str());
    }
    int plan_state = s;
    if (delay_aware()) {
        const std::vector<int> pending = resolve_pending_queue(queue_, z);
        plan_state = predict_future_state(s, pending, model_, rng);
    }
    const int action = plan(plan_state, rng);
    queue_.push(action, z);
    return action;
}

int AgentState::plan(int s, RngStream& rng, bool explore) {
    if (uses_q()) {
        if (explore && rng.bernoulli(qlearn_.epsilon)) {
            return rng.uniform_int(model_.n_actions());
        }
        const auto base = static_cast<std::size_t>(s) * model_.n_actions();
        int best = 0;
        for (int a = 1; a < model_.n_actions(); ++a) {
            if (q_table_[base + static_cast<std::size_t>(a)] >
                q_table_[base + static_cast<std::size_t>(best)]) {
                best = a;
            }
        }
        return best;
    }
    if (planner_.mode == MctsMode::ExpectimaxToDepth) {
        return plan_from_values(cached_expectimax(), model_, s, planner_.rollout_depth,
                                planner_.discount)
            .action;
    }
    return mcts_plan(s, model_, planner_, rng).action;
}

void AgentState::observe_episode(const EpisodeRecord& record,
                                 const std::vector<int>& episode_defaults) {
    std::vector<int> delays;
    delays.reserve(record.steps.size());
    for (const StepRecord& step : record.steps) delays.push_back(step.delay);
    const std::vector<CorrectedTransition> corrected =
        postprocess_episode(record, delays, episode_defaults, max_delay_);
    if (!model_.is_exact()) {
        for (const CorrectedTransition& t : corrected) model_.observe(t.s, t.a, t.r, t.next);
        ++model_version_;
    }
    if (uses_q()) {
        const int n_actions = model_.n_actions();
        for (const CorrectedTransition& t : corrected) {
            const auto idx = static_cast<std::size_t>(t.s) * n_actions + t.a;
            const auto next_base = static_cast<std::size_t>(t.next) * n_actions;
            double best_next = q_table_[next_base];
            for (int a = 1; a < n_actions; ++a) {
                best_next = std::max(best_next, q_table_[next_base + static_cast<std::size_t>(a)]);
            }
            const double target = t.r + planner_.discount * best_next;
            q_table_[idx] += qlearn_.learning_rate * (target - q_table_[idx]);
        }
    }
}

double AgentState::q_value(int s, int a) const {
    if (s < 0 || s >= model_.n_states()) out_of_range_fail("state", s, model_.n_states());
    if (a < 0 || a >= model_.n_actions()) out_of_range_fail("action", a, model_.n_actions());
    return q_table_[static_cast<std::size_t>(s) * model_.n_actions() + a];
}

const std::vector<double>& AgentState::cached_expectimax() {
    if (cache_version_ != model_version_) {
        expectimax_cache_ = expectimax_values(model_, planner_.rollout_depth, planner_.discount);
        cache_version_ = model_version_;
    }
    return expectimax_cache_;
}

} // namespace sedmdp
