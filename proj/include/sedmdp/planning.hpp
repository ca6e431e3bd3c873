#pragma once

#include "sedmdp/mdp.hpp"
#include "sedmdp/queue.hpp"
#include "sedmdp/rng.hpp"
#include "sedmdp/sed_env.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace sedmdp {

enum class PredictionMode { Mode, Sample };  // most-likely next state vs a draw

// Next-state predictor used by planners: either the true dynamics or a
// tabular model learned from counts with Laplace smoothing. Predictive
// distributions are always proper; unseen (s, a) pairs fall back to uniform.
class ForwardModel {
public:
    static ForwardModel exact(MdpSpec mdp, PredictionMode mode = PredictionMode::Mode);
    static ForwardModel tabular(int n_states, int n_actions, double alpha,
                                PredictionMode mode = PredictionMode::Mode);

    std::vector<double> next_state_probs(int s, int a) const;
    double expected_reward(int s, int a) const;  // observed mean; 0 for unseen
    // Mode prediction: most likely next state (ties -> lowest id); sample
    // prediction: a draw from the predictive distribution. Successors the
    // model knows to be absorbing are dropped and the rest renormalized
    // (unless nothing else has mass): a queued decision only matters while
    // the episode is still running, so the landing-state prediction
    // conditions on survival. Only the exact kind knows absorbing states;
    // learned models carry no termination signal.
    int predict(int s, int a, RngStream& rng) const;
    bool is_terminal(int s) const;

    // Records one transition; only the tabular kind accumulates.
    void observe(int s, int a, double r, int next);

    bool is_exact() const { return exact_; }
    PredictionMode mode() const { return mode_; }
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

private:
    ForwardModel() = default;
    void check_pair(int s, int a) const;

    bool exact_ = false;
    MdpSpec mdp_;  // exact kind only
    int n_states_ = 0;
    int n_actions_ = 0;
    double alpha_ = 0.0;
    PredictionMode mode_ = PredictionMode::Mode;
    std::vector<std::int64_t> counts_;     // [s][a][s']
    std::vector<std::int64_t> pair_count_; // [s][a]
    std::vector<double> reward_sum_;       // [s][a]
};

// One step of learning data: state, *executed* action, reward, next state.
struct CorrectedTransition {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int next = 0;
};

// Builds a tabular model from corrected transitions. alpha is the Laplace
// smoothing weight; negative alpha is a domain error.
ForwardModel learn_model(const std::vector<CorrectedTransition>& transitions, int n_states,
                         int n_actions, double alpha,
                         PredictionMode mode = PredictionMode::Mode);

// Chains the model through the pending actions: the state the current
// decision is expected to reach when it finally executes. Empty pending
// returns s unchanged; mode prediction makes the chain deterministic.
int predict_future_state(int s, std::span<const int> pending, const ForwardModel& model,
                         RngStream& rng);

enum class MctsMode { SampledTransitions, ExpectimaxToDepth };

struct MctsConfig {
    int n_simulations = 256;
    double uct_c = 1.4142135623730951;  // sqrt(2)
    int rollout_depth = 16;
    double discount = 0.95;  // harness sets this to the MDP's gamma
    MctsMode mode = MctsMode::SampledTransitions;

    void validate() const;  // throws std::invalid_argument
};

struct PlanResult {
    int action = 0;
    std::vector<double> visit_probs;  // normalized root visit counts
    std::vector<double> q_values;     // root action-value estimates
};

// Plans from state s under the model. SampledTransitions runs UCT with
// uniform rollouts below the tree; ExpectimaxToDepth computes exact
// depth-limited values under the model (its "visit" distribution is a point
// mass on the chosen action). Ties break toward the lowest action id.
PlanResult mcts_plan(int s, const ForwardModel& model, const MctsConfig& config,
                     RngStream& rng);

// Exact depth-limited optimal values under the model, laid out as
// values[d * n_states + s] for remaining depth d in 0..depth.
std::vector<double> expectimax_values(const ForwardModel& model, int depth, double discount);

// Decides the first M actions of an episode by alternating planning and
// model chaining from s0; these seed the default queue.
std::vector<int> bootstrap_initial_queue(int s0, const ForwardModel& model,
                                         const MctsConfig& config, int max_delay,
                                         RngStream& rng);

// Recomputes each step's executed action from the defaults, the decided
// actions, and the delay sequence, and emits (s, executed action, reward,
// next state) tuples for learning. The record's own executed actions must
// agree (std::logic_error otherwise); a delays/steps length mismatch is a
// domain error.
std::vector<CorrectedTransition> postprocess_episode(const EpisodeRecord& record,
                                                     std::span<const int> delays,
                                                     const std::vector<int>& default_queue,
                                                     int max_delay);

enum class AgentKind { DelayedMcts, ObliviousMcts, DelayedQ, ObliviousQ };

AgentKind agent_kind_from_string(const std::string& name);
std::string to_string(AgentKind kind);

struct QLearningConfig {
    double learning_rate = 0.1;
    double epsilon = 0.1;
};

// A planning agent plus the queue it mirrors against the environment.
// Delay-aware kinds resolve the pending queue and plan at the predicted
// future state; oblivious kinds plan at the observed state. Q kinds replace
// the tree search with a greedy read of a learned tabular Q.
class AgentState {
public:
    AgentState(AgentKind kind, ForwardModel model, MctsConfig planner, QLearningConfig qlearn,
               std::vector<int> default_queue, int max_delay);

    bool delay_aware() const {
        return kind_ == AgentKind::DelayedMcts || kind_ == AgentKind::DelayedQ;
    }
    bool uses_q() const {
        return kind_ == AgentKind::DelayedQ || kind_ == AgentKind::ObliviousQ;
    }
    AgentKind kind() const { return kind_; }
    const ForwardModel& model() const { return model_; }
    const QueueState& queue() const { return queue_; }

    // Rebuilds the queue mirror for a fresh episode with these defaults.
    void begin_episode(const std::vector<int>& defaults);

    // Forward-chained first-M actions from s0 using this agent's own planner
    // (exploitation only for Q kinds: the queue seed should be its best guess).
    std::vector<int> plan_initial_queue(int s0, RngStream& rng);

    // One decision. env_time >= 0 enables the synchronization check against
    // the environment clock (std::logic_error on mismatch).
    int act(int s, int z, RngStream& rng, std::int64_t env_time = -1);

    // Post-episode learning: corrects the record to executed actions, then
    // updates the tabular model (if learned) and the Q table (Q kinds).
    void observe_episode(const EpisodeRecord& record, const std::vector<int>& episode_defaults);

    // Greedy/eps-greedy planning at one state (exposed for tests).
    int plan(int s, RngStream& rng, bool explore = true);

    double q_value(int s, int a) const;

private:
    const std::vector<double>& cached_expectimax();

    AgentKind kind_;
    ForwardModel model_;
    MctsConfig planner_;
    QLearningConfig qlearn_;
    std::vector<int> default_queue_;
    int max_delay_ = 0;
    QueueState queue_;
    std::vector<double> q_table_;  // [s][a], Q kinds
    std::vector<double> expectimax_cache_;
    std::int64_t model_version_ = 0;
    std::int64_t cache_version_ = -1;
};

} // namespace sedmdp
