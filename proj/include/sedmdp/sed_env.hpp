#pragma once

#include "sedmdp/delay.hpp"
#include "sedmdp/mdp.hpp"
#include "sedmdp/policy.hpp"
#include "sedmdp/queue.hpp"
#include "sedmdp/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sedmdp {

// An MDP paired with a delay process and the default actions that fill the
// pending queue before any decided action can land.
struct SedConfig {
    MdpSpec mdp;
    DelayProcess delay;
    std::vector<int> default_queue;  // size = delay.max_delay()

    int max_delay() const { return delay.max_delay(); }
    void validate() const;  // throws std::invalid_argument
};

struct StepOutcome {
    int next_state = 0;
    double reward = 0.0;
    int executed_action = 0;         // a_{tau_t}
    std::int64_t decision_time = 0;  // tau_t (negative: a default slot)
    int next_delay = 0;              // z_{t+1}, observed with s_{t+1}
    bool terminal = false;
};

struct StepRecord {
    std::int64_t t = 0;
    int state = 0;
    int delay = 0;
    int decided_action = 0;
    int executed_action = 0;
    std::int64_t decision_time = 0;
    double reward = 0.0;
};

struct EpisodeRecord {
    std::vector<StepRecord> steps;
    int final_state = 0;
    int final_delay = 0;

    double undiscounted_return() const;
    double discounted_return(double discount) const;
};

// Stateful episode driver. One step: the caller decides a_t from (s_t, z_t)
// and the pending queue; the environment executes the action whose decision
// time is effective now, pays its reward, draws s_{t+1} and z_{t+1}.
class SedEnv {
public:
    explicit SedEnv(SedConfig config);

    // Starts an episode: draws s_0 and z_0, refills the queue with the
    // default actions. With carryover=true the delay process keeps its
    // internal state across the boundary (the random walk resumes where the
    // previous episode left it); otherwise it restarts fresh.
    void reset(RngStream& rng, bool carryover = false);

    // Replaces the queued default actions before the first decision of the
    // current episode (throws std::logic_error mid-episode). The queue is
    // rebuilt as if these had always been the defaults.
    void install_default_queue(const std::vector<int>& actions);

    StepOutcome step(int decided_action, RngStream& rng);

    int state() const { return state_; }
    int delay() const { return delay_; }
    std::int64_t time() const { return time_; }
    bool done() const { return done_; }
    const QueueState& queue() const { return queue_; }
    const SedConfig& config() const { return config_; }
    DelayProcess& delay_process() { return config_.delay; }

private:
    SedConfig config_;
    QueueState queue_;
    int state_ = 0;
    int delay_ = 0;
    std::int64_t time_ = 0;
    bool done_ = true;
};

// Runs one episode with the policy deciding at every step until a terminal
// state or max_steps. Decisions use the rule indexed by the current step
// applied to the realized history of states, delays, and executed actions.
EpisodeRecord run_episode(SedEnv& env, const Policy& policy, int max_steps, RngStream& rng,
                          bool carryover = false);

// Samples s' from P(.|s,a).
int sample_next_state(const MdpSpec& mdp, int s, int a, RngStream& rng);

} // namespace sedmdp
