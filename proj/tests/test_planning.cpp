#include "doctest.h"

#include "sedmdp/envs.hpp"
#include "sedmdp/planning.hpp"
#include "sedmdp/sed_env.hpp"

#include <array>
#include <cmath>
#include <vector>

using namespace sedmdp;

namespace {

MdpSpec two_armed_bandit() {
    MdpSpec mdp;
    mdp.name = "bandit";
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.transitions = {1.0, 1.0};
    mdp.rewards = {0.1, 1.0};
    mdp.initial = {1.0};
    mdp.discount = 0.5;
    mdp.terminal.assign(1, 0);
    return mdp;
}

MdpSpec sticky_two_state() {
    // Action 0 rows chosen so chained mode prediction and the argmax of the
    // two-step composition coincide.
    MdpSpec mdp;
    mdp.name = "sticky";
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.transitions = {0.9, 0.1, 0.2, 0.8, 0.2, 0.8, 0.9, 0.1};
    mdp.rewards = {0.0, 0.0, 0.0, 0.0};
    mdp.initial = {1.0, 0.0};
    mdp.discount = 0.9;
    mdp.terminal.assign(2, 0);
    return mdp;
}

} // namespace

TEST_SUITE("planning") {

TEST_CASE("the exact model mirrors the dynamics and refuses updates") {
    const MdpSpec mdp = make_chain(4, 0.2, 0.9);
    const ForwardModel model = ForwardModel::exact(mdp);
    CHECK(model.is_exact());
    CHECK(model.n_states() == 4);
    CHECK(model.n_actions() == 2);
    const std::vector<double> row = model.next_state_probs(0, 1);
    CHECK(row[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(row[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(model.expected_reward(2, 1) == mdp.reward(2, 1));
    ForwardModel mutable_copy = model;
    CHECK_THROWS_AS(mutable_copy.observe(0, 0, 0.0, 0), std::logic_error);
}

TEST_CASE("tabular counts shape the predictive rows") {
    ForwardModel model = ForwardModel::tabular(2, 2, 0.0);
    model.observe(0, 1, 0.5, 1);
    CHECK(model.next_state_probs(0, 1) == std::vector<double>{0.0, 1.0});
    CHECK(model.expected_reward(0, 1) == 0.5);
    // Unseen pair with no smoothing mass still yields a proper distribution.
    CHECK(model.next_state_probs(1, 0) == std::vector<double>{0.5, 0.5});
    CHECK(model.expected_reward(1, 0) == 0.0);

    ForwardModel smoothed = ForwardModel::tabular(2, 2, 1.0);
    CHECK(smoothed.next_state_probs(0, 0) == std::vector<double>{0.5, 0.5});
    smoothed.observe(0, 0, 1.0, 0);
    smoothed.observe(0, 0, 1.0, 0);
    // (2 + 1) / (2 + 2) vs (0 + 1) / (2 + 2)
    CHECK(smoothed.next_state_probs(0, 0) == std::vector<double>{0.75, 0.25});

    CHECK_THROWS_AS(ForwardModel::tabular(2, 2, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(learn_model({}, 2, 2, -1.0), std::invalid_argument);
}

TEST_CASE("a learned model concentrates on the sampling distribution") {
    const std::vector<double> truth = {0.3, 0.7};
    RngStream rng(2024);
    std::vector<CorrectedTransition> transitions;
    transitions.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
        CorrectedTransition t;
        t.s = 0;
        t.a = 0;
        t.next = rng.categorical(truth);
        t.r = t.next == 1 ? 1.0 : 0.0;
        transitions.push_back(t);
    }
    const ForwardModel model = learn_model(transitions, 2, 2, 0.5);
    const std::vector<double> row = model.next_state_probs(0, 0);
    CHECK(std::abs(row[0] - 0.3) < 0.05);
    CHECK(std::abs(row[1] - 0.7) < 0.05);
    CHECK(std::abs(model.expected_reward(0, 0) - 0.7) < 0.05);
}

TEST_CASE("mode prediction takes the most likely state with low-id ties") {
    RngStream rng(1);
    const ForwardModel skew = ForwardModel::exact(sticky_two_state());
    CHECK(skew.predict(0, 1, rng) == 1);  // row {0.2, 0.8}
    CHECK(skew.predict(0, 0, rng) == 0);  // row {0.9, 0.1}

    ForwardModel tied = ForwardModel::tabular(2, 2, 1.0);
    CHECK(tied.predict(1, 1, rng) == 0);  // uniform row: lowest id wins

    ForwardModel sampler = ForwardModel::exact(sticky_two_state(), PredictionMode::Sample);
    int ones = 0;
    for (int i = 0; i < 2000; ++i) ones += sampler.predict(0, 1, rng);
    CHECK(ones > 1400);  // p = 0.8
    CHECK(ones < 1900);
}

TEST_CASE("future-state chaining walks the pending actions through the model") {
    RngStream rng(7);
    const ForwardModel chain_model = ForwardModel::exact(make_chain(4, 0.0, 0.9));
    CHECK(predict_future_state(0, {}, chain_model, rng) == 0);
    const std::array<int, 2> two_rights = {1, 1};
    CHECK(predict_future_state(0, two_rights, chain_model, rng) == 2);

    // On the sticky instance, chained mode prediction agrees with the argmax
    // of the explicit two-step composition.
    const MdpSpec sticky = sticky_two_state();
    const ForwardModel sticky_model = ForwardModel::exact(sticky);
    const std::array<int, 2> persist = {0, 0};
    const int chained = predict_future_state(0, persist, sticky_model, rng);
    std::vector<double> composed(2, 0.0);
    for (int mid = 0; mid < 2; ++mid) {
        for (int end = 0; end < 2; ++end) {
            composed[static_cast<std::size_t>(end)] += sticky.p(0, 0, mid) * sticky.p(mid, 0, end);
        }
    }
    const int compose_argmax = composed[0] >= composed[1] ? 0 : 1;
    CHECK(chained == compose_argmax);
    CHECK(chained == 0);
}

TEST_CASE("search settles on the better arm of a bandit") {
    const ForwardModel model = ForwardModel::exact(two_armed_bandit());
    MctsConfig config;
    config.n_simulations = 256;
    config.discount = 0.0;  // pure immediate-reward comparison
    config.rollout_depth = 4;
    RngStream rng(5);
    const PlanResult plan = mcts_plan(0, model, config, rng);
    CHECK(plan.action == 1);
    CHECK(plan.visit_probs[1] > plan.visit_probs[0]);
    CHECK(plan.q_values[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(plan.q_values[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("depth-limited exact planning reproduces hand-computed chain values") {
    const ForwardModel model = ForwardModel::exact(make_chain(5, 0.0, 0.95));
    MctsConfig config;
    config.mode = MctsMode::ExpectimaxToDepth;
    config.rollout_depth = 16;
    config.discount = 0.95;
    RngStream rng(9);
    const PlanResult plan = mcts_plan(0, model, config, rng);
    CHECK(plan.action == 1);
    CHECK(plan.q_values[0] == doctest::Approx(0.81450625).epsilon(1e-9));
    CHECK(plan.q_values[1] == doctest::Approx(0.857375).epsilon(1e-9));
    CHECK(plan.visit_probs == std::vector<double>{0.0, 1.0});

    const std::vector<double> values = expectimax_values(model, 16, 0.95);
    // Depth-16 slice: values for states 0..4 at full lookahead.
    const std::size_t base = 16 * 5;
    CHECK(values[base + 0] == doctest::Approx(0.857375).epsilon(1e-9));
    CHECK(values[base + 1] == doctest::Approx(0.9025).epsilon(1e-9));
    CHECK(values[base + 2] == doctest::Approx(0.95).epsilon(1e-9));
    CHECK(values[base + 3] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(values[base + 4] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("a single simulation yields a point-mass visit distribution") {
    const ForwardModel model = ForwardModel::exact(two_armed_bandit());
    MctsConfig config;
    config.n_simulations = 1;
    RngStream rng(3);
    const PlanResult plan = mcts_plan(0, model, config, rng);
    CHECK(plan.visit_probs == std::vector<double>{1.0, 0.0});  // untried low id first
    CHECK(plan.action == 0);
}

TEST_CASE("planner configuration rejects out-of-range settings") {
    MctsConfig config;
    CHECK_NOTHROW(config.validate());
    config.n_simulations = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = MctsConfig{};
    config.uct_c = -0.1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = MctsConfig{};
    config.rollout_depth = -1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = MctsConfig{};
    config.discount = 1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("queue bootstrapping chains plans through predicted states") {
    const ForwardModel model = ForwardModel::exact(make_chain(5, 0.0, 0.95));
    MctsConfig config;
    config.mode = MctsMode::ExpectimaxToDepth;
    config.rollout_depth = 16;
    config.discount = 0.95;
    RngStream rng(17);
    CHECK(bootstrap_initial_queue(0, model, config, 0, rng).empty());
    CHECK(bootstrap_initial_queue(0, model, config, 2, rng) == std::vector<int>{1, 1});

    const ForwardModel bandit = ForwardModel::exact(two_armed_bandit());
    MctsConfig bandit_config;
    bandit_config.mode = MctsMode::ExpectimaxToDepth;
    bandit_config.rollout_depth = 4;
    bandit_config.discount = 0.0;
    CHECK(bootstrap_initial_queue(0, bandit, bandit_config, 2, rng) == std::vector<int>{1, 1});
}

TEST_CASE("agent kinds round-trip through their names") {
    for (const char* name : {"delayed-mcts", "oblivious-mcts", "delayed-q", "oblivious-q"}) {
        CHECK(to_string(agent_kind_from_string(name)) == name);
    }
    CHECK_THROWS_AS(agent_kind_from_string("clairvoyant"), std::invalid_argument);
}

TEST_CASE("a delay-aware agent plans for where the queue will put it") {
    MctsConfig config;
    config.mode = MctsMode::ExpectimaxToDepth;
    config.rollout_depth = 16;
    config.discount = 0.9;
    AgentState agent(AgentKind::DelayedMcts, ForwardModel::exact(make_chain(5, 0.0, 0.9)),
                     config, {}, {1, 1}, 2);
    agent.begin_episode({1, 1});
    RngStream rng(21);
    // Queue holds two RIGHTs: the decision will land at state 2, where RIGHT
    // is still the optimal (and chosen) action.
    CHECK(agent.act(0, 2, rng, 0) == 1);
    CHECK_THROWS_WITH_AS(agent.act(0, 2, rng, 5), doctest::Contains("environment"),
                         std::logic_error);
}

TEST_CASE("delay-aware control clears the delayed chain in the minimal time") {
    const SedConfig config{make_chain(4, 0.0, 0.9), DelayProcess::constant(2), {0, 0}};

    MctsConfig planner;
    planner.mode = MctsMode::ExpectimaxToDepth;
    planner.rollout_depth = 16;
    planner.discount = 0.9;

    AgentState agent(AgentKind::DelayedMcts, ForwardModel::exact(config.mdp), planner, {},
                     config.default_queue, 2);
    SedEnv env(config);
    RngStream rng(31);
    env.reset(rng);
    agent.begin_episode(config.default_queue);
    int steps = 0;
    while (!env.done() && steps < 20) {
        const int a = agent.act(env.state(), env.delay(), rng, env.time());
        env.step(a, rng);
        ++steps;
    }
    // Two wasted defaults, then three RIGHTs decided just in time.
    CHECK(steps == 5);
    CHECK(env.state() == 3);
}

TEST_CASE("postprocessing recovers executed actions from the raw pieces") {
    // Six-step window with large delays: defaults execute for five steps,
    // then the decision made at step 1 finally lands.
    const std::vector<int> defaults = {0, 1, 2, 3, 4};
    const std::vector<int> decided = {5, 6, 7, 8, 9, 9};
    const std::vector<int> delays = {5, 4, 4, 4, 3, 3};
    const std::vector<int> expected_executed = {0, 1, 2, 3, 4, 6};

    EpisodeRecord record;
    for (int t = 0; t < 6; ++t) {
        StepRecord step;
        step.t = t;
        step.state = 0;
        step.delay = delays[static_cast<std::size_t>(t)];
        step.decided_action = decided[static_cast<std::size_t>(t)];
        step.executed_action = expected_executed[static_cast<std::size_t>(t)];
        step.decision_time = 0;  // unused by postprocessing
        step.reward = 0.25;
        record.steps.push_back(step);
    }
    record.final_state = 0;

    const std::vector<CorrectedTransition> transitions =
        postprocess_episode(record, delays, defaults, 5);
    REQUIRE(transitions.size() == 6);
    for (int t = 0; t < 6; ++t) {
        CHECK(transitions[static_cast<std::size_t>(t)].a ==
              expected_executed[static_cast<std::size_t>(t)]);
        CHECK(transitions[static_cast<std::size_t>(t)].r == 0.25);
    }

    // Length and content mismatches are rejected loudly.
    const std::vector<int> short_delays = {5, 4, 4, 4, 3};
    CHECK_THROWS_AS(postprocess_episode(record, short_delays, defaults, 5),
                    std::invalid_argument);
    EpisodeRecord lying = record;
    lying.steps[5].executed_action = 9;
    CHECK_THROWS_AS(postprocess_episode(lying, delays, defaults, 5), std::logic_error);
    EpisodeRecord drifted = record;
    drifted.steps[2].delay = 1;
    CHECK_THROWS_AS(postprocess_episode(drifted, delays, defaults, 5), std::invalid_argument);
}

TEST_CASE("postprocessing with no delay is the identity on actions") {
    EpisodeRecord record;
    const std::vector<int> states = {0, 1, 2};
    const std::vector<int> decided = {1, 1, 1};
    for (int t = 0; t < 3; ++t) {
        StepRecord step;
        step.t = t;
        step.state = states[static_cast<std::size_t>(t)];
        step.delay = 0;
        step.decided_action = decided[static_cast<std::size_t>(t)];
        step.executed_action = decided[static_cast<std::size_t>(t)];
        step.decision_time = t;
        step.reward = t == 2 ? 1.0 : 0.0;
        record.steps.push_back(step);
    }
    record.final_state = 3;
    const std::vector<int> delays = {0, 0, 0};
    const std::vector<CorrectedTransition> transitions =
        postprocess_episode(record, delays, {}, 0);
    REQUIRE(transitions.size() == 3);
    for (int t = 0; t < 3; ++t) {
        CHECK(transitions[static_cast<std::size_t>(t)].s == states[static_cast<std::size_t>(t)]);
        CHECK(transitions[static_cast<std::size_t>(t)].a == 1);
        CHECK(transitions[static_cast<std::size_t>(t)].next == (t == 2 ? 3 : states[static_cast<std::size_t>(t) + 1]));
    }
}

TEST_CASE("a learning agent updates its value table from executed actions") {
    MctsConfig planner;
    planner.discount = 0.9;
    AgentState agent(AgentKind::DelayedQ, ForwardModel::tabular(4, 2, 1.0), planner, {}, {}, 0);
    agent.begin_episode({});

    EpisodeRecord record;
    const std::vector<int> states = {0, 1, 2};
    for (int t = 0; t < 3; ++t) {
        StepRecord step;
        step.t = t;
        step.state = states[static_cast<std::size_t>(t)];
        step.delay = 0;
        step.decided_action = 1;
        step.executed_action = 1;
        step.decision_time = t;
        step.reward = t == 2 ? 1.0 : 0.0;
        record.steps.push_back(step);
    }
    record.final_state = 3;

    agent.observe_episode(record, {});
    CHECK(agent.q_value(2, 1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(agent.q_value(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    // One observed (2,1)->3 with unit smoothing: (1+1)/(1+4).
    CHECK(agent.model().next_state_probs(2, 1)[3] == doctest::Approx(0.4).epsilon(1e-12));

    RngStream rng(13);
    CHECK(agent.plan(2, rng, /*explore=*/false) == 1);

    // A second pass propagates value backwards one more step.
    agent.observe_episode(record, {});
    CHECK(agent.q_value(1, 1) == doctest::Approx(0.1 * 0.9 * 0.1).epsilon(1e-12));
}

TEST_CASE("epsilon-greedy exploration stays inside the action set") {
    MctsConfig planner;
    planner.discount = 0.9;
    QLearningConfig qlearn;
    qlearn.epsilon = 0.5;
    AgentState agent(AgentKind::ObliviousQ, ForwardModel::tabular(4, 2, 1.0), planner, qlearn,
                     {}, 0);
    agent.begin_episode({});
    RngStream rng(77);
    int explored[2] = {0, 0};
    for (int i = 0; i < 200; ++i) {
        const int a = agent.plan(0, rng, /*explore=*/true);
        REQUIRE(a >= 0);
        REQUIRE(a < 2);
        ++explored[a];
    }
    CHECK(explored[0] > 0);
    CHECK(explored[1] > 0);
}

} // TEST_SUITE
