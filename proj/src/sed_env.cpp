#include "sedmdp/sed_env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedmdp {

void SedConfig::validate() const {
    mdp.validate();
    const int m = delay.max_delay();
    if (static_cast<int>(default_queue.size()) != m) {
        std::ostringstream oss;
        oss << "default queue has " << default_queue.size() << " actions, expected max delay "
            << m;
        throw std::invalid_argument(oss.str());
    }
    for (std::size_t i = 0; i < default_queue.size(); ++i) {
        const int a = default_queue[i];
        if (a < 0 || a >= mdp.n_actions) {
            std::ostringstream oss;
            oss << "default queue entry " << i << " is action " << a << ", outside [0, "
                << mdp.n_actions << ")";
            throw std::invalid_argument(oss.str());
        }
    }
}

double EpisodeRecord::undiscounted_return() const {
    double sum = 0.0;
    for (const StepRecord& step : steps) sum += step.reward;
    return sum;
}

double EpisodeRecord::discounted_return(double discount) const {
    double sum = 0.0;
    double weight = 1.0;
    for (const StepRecord& step : steps) {
        sum += weight * step.reward;
        weight *= discount;
    }
    return sum;
}

SedEnv::SedEnv(SedConfig config)
    : config_(std::move(config)), queue_(config_.default_queue, config_.max_delay()) {
    config_.validate();
}

void SedEnv::reset(RngStream& rng, bool carryover) {
    if (!carryover) config_.delay.reset_fresh();
    queue_ = QueueState(config_.default_queue, config_.max_delay());
    state_ = rng.categorical(config_.mdp.initial);
    delay_ = config_.delay.sample(rng);
    time_ = 0;
    done_ = config_.mdp.is_terminal(state_);
}

void SedEnv::install_default_queue(const std::vector<int>& actions) {
    if (time_ != 0) {
        throw std::logic_error("default queue can only be replaced before the first step");
    }
    SedConfig trial = config_;
    trial.default_queue = actions;
    trial.validate();
    config_.default_queue = actions;
    queue_ = QueueState(actions, config_.max_delay());
}

StepOutcome SedEnv::step(int decided_action, RngStream& rng) {
    if (done_) throw std::logic_error("step called on a finished episode; reset first");
    if (decided_action < 0 || decided_action >= config_.mdp.n_actions) {
        std::ostringstream oss;
        oss << "decided action " << decided_action << " outside [0, " << config_.mdp.n_actions
            << ")";
        throw std::invalid_argument(oss.str());
    }

    // The action executed now was decided at the effective decision time; with
    // zero delay that is this very step's decision.
    const std::int64_t tau = effective_decision_time(queue_, delay_);
    const int executed = tau == time_ ? decided_action : queue_.action_at(tau);
    queue_.push(decided_action, delay_);

    StepOutcome out;
    out.decision_time = tau;
    out.executed_action = executed;
    out.reward = config_.mdp.reward(state_, executed);
    out.next_state = sample_next_state(config_.mdp, state_, executed, rng);
    out.next_delay = config_.delay.sample(rng);
    out.terminal = config_.mdp.is_terminal(out.next_state);

    state_ = out.next_state;
    delay_ = out.next_delay;
    time_ = queue_.time();
    done_ = out.terminal;
    return out;
}

EpisodeRecord run_episode(SedEnv& env, const Policy& policy, int max_steps, RngStream& rng,
                          bool carryover) {
    if (max_steps < 0) throw std::invalid_argument("max_steps must be nonnegative");
    env.reset(rng, carryover);
    const int n_actions = env.config().mdp.n_actions;

    History h;
    h.states.push_back(env.state());
    h.delays.push_back(env.delay());

    EpisodeRecord record;
    for (int t = 0; t < max_steps && !env.done(); ++t) {
        StepRecord step;
        step.t = t;
        step.state = env.state();
        step.delay = env.delay();
        step.decided_action = decide(policy, t, h, n_actions, rng);
        const StepOutcome out = env.step(step.decided_action, rng);
        step.executed_action = out.executed_action;
        step.decision_time = out.decision_time;
        step.reward = out.reward;
        record.steps.push_back(step);

        h.actions.push_back(out.executed_action);
        h.states.push_back(out.next_state);
        h.delays.push_back(out.next_delay);
    }
    record.final_state = env.state();
    record.final_delay = env.delay();
    return record;
}

int sample_next_state(const MdpSpec& mdp, int s, int a, RngStream& rng) {
    return rng.categorical(mdp.row(s, a));
}

} // namespace sedmdp
