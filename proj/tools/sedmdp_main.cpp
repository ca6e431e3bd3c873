#include "CLI11.hpp"

#include "sedmdp/checks.hpp"
#include "sedmdp/envs.hpp"
#include "sedmdp/harness.hpp"
#include "sedmdp/oracles.hpp"

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::string join_ints(const std::vector<int>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(values[i]);
    }
    out += ']';
    return out;
}

int do_run(const std::string& config_path, std::uint64_t seed, int threads,
           const std::string& out) {
    const sedmdp::ExperimentConfig config = sedmdp::load_experiment_config(config_path);
    sedmdp::RunOptions opts;
    opts.master_seed = seed;
    opts.threads = threads;
    opts.out_override = out;
    const sedmdp::RunResult result = sedmdp::run_experiment(config, opts);
    std::cout << "run " << result.run_id << ": " << result.rows.size() << " episodes, "
              << result.total_interactions << " environment interactions\n";
    for (sedmdp::AgentKind kind : config.agents) {
        const std::string name = sedmdp::to_string(kind);
        double sum = 0.0;
        std::int64_t count = 0;
        for (const sedmdp::ResultRow& row : result.rows) {
            if (row.agent != name) continue;
            sum += row.undiscounted;
            ++count;
        }
        std::cout << "  " << name << ": mean return "
                  << sedmdp::format_compact(count ? sum / static_cast<double>(count) : 0.0)
                  << " over " << count << " episodes\n";
    }
    std::cout << "results in " << result.out_dir << "\n";
    return 0;
}

int do_verify(const std::string& suite, std::uint64_t seed) {
    const sedmdp::Battery battery = sedmdp::run_battery(suite, seed);
    std::cout << "verify " << battery.suite << ":\n";
    sedmdp::print_battery(battery, std::cout);
    const bool passed = battery.all_passed();
    std::cout << (passed ? "all checks passed" : "CHECKS FAILED") << " ("
              << battery.checks.size() << " checks)\n";
    return passed ? 0 : 1;
}

int do_solve(const std::string& env_spec, int max_delay, double tol) {
    const sedmdp::MdpSpec mdp = sedmdp::resolve_env(env_spec);
    const sedmdp::AugmentedSolution sol = sedmdp::augmented_vi(mdp, max_delay, tol);
    std::cout << "environment " << mdp.name << ": " << mdp.n_states << " states, "
              << mdp.n_actions << " actions\n";
    std::cout << "augmented problem: M=" << max_delay << ", " << sol.n_augmented
              << " states, converged in " << sol.iterations << " sweeps (residual "
              << sedmdp::format_compact(sol.residual) << ")\n";
    const std::vector<int> zeros(static_cast<std::size_t>(max_delay), 0);
    std::cout << "initial value with all-0 defaults: "
              << sedmdp::format_compact(sol.initial_value(mdp, zeros)) << "\n";
    if (sol.n_augmented <= 64) {
        for (std::int64_t id = 0; id < sol.n_augmented; ++id) {
            const auto [s, queue] = sol.decode(id);
            std::cout << "  s=" << s << " queue=" << join_ints(queue) << " value="
                      << sedmdp::format_compact(sol.values[static_cast<std::size_t>(id)])
                      << " greedy=" << sol.greedy[static_cast<std::size_t>(id)] << "\n";
        }
    }
    return 0;
}

int do_enumerate(const std::string& config_path, int horizon) {
    const sedmdp::ExperimentConfig config = sedmdp::load_experiment_config(config_path);
    const sedmdp::SedConfig sed{config.mdp, config.delay, config.default_queue};
    const sedmdp::UniformPolicy uniform(config.mdp.n_actions);
    std::vector<sedmdp::WeightedHistory> histories =
        sedmdp::enumerate_histories(sed, uniform, horizon);
    double mass = 0.0;
    for (const sedmdp::WeightedHistory& wh : histories) mass += wh.probability;
    std::cout << histories.size() << " histories of horizon " << horizon
              << " under the uniform policy, total probability "
              << sedmdp::format_compact(mass) << "\n";
    std::sort(histories.begin(), histories.end(),
              [](const sedmdp::WeightedHistory& a, const sedmdp::WeightedHistory& b) {
                  return a.probability > b.probability;
              });
    const std::size_t shown = std::min<std::size_t>(10, histories.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const sedmdp::WeightedHistory& wh = histories[i];
        std::cout << "  p=" << sedmdp::format_compact(wh.probability) << " s="
                  << join_ints(wh.history.states) << " z=" << join_ints(wh.history.delays)
                  << " a=" << join_ints(wh.history.actions) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and planning toolkit for MDPs with stochastically delayed execution"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    app.add_option("--seed", seed, "Master seed (0 = frozen defaults for verify)");
    app.add_option("--threads", threads, "Worker threads for run")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "Output directory override for run");

    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string run_config;
    run->add_option("--config", run_config, "Path to the experiment config")->required();

    auto* verify = app.add_subcommand("verify", "Run a named check battery");
    std::string suite;
    verify->add_option("suite", suite, "queues | theorem1 | theorem2 | planner | walk")
        ->required();

    auto* solve = app.add_subcommand("solve-augmented",
                                     "Solve the queue-augmented control problem exactly");
    std::string env_spec;
    int max_delay = 0;
    double tol = 1e-10;
    solve->add_option("--env", env_spec, "Builtin spec (chain:/gridworld:/branch) or file path")
        ->required();
    solve->add_option("--M", max_delay, "Maximum delay")->required()
        ->check(CLI::NonNegativeNumber);
    solve->add_option("--tol", tol, "Value-iteration tolerance");

    auto* enumerate =
        app.add_subcommand("enumerate", "Enumerate process histories under the uniform policy");
    std::string enum_config;
    int horizon = 0;
    enumerate->add_option("--config", enum_config, "Path to the experiment config")->required();
    enumerate->add_option("--horizon", horizon, "History length in steps")->required()
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(run_config, seed, threads, out);
        if (verify->parsed()) return do_verify(suite, seed);
        if (solve->parsed()) return do_solve(env_spec, max_delay, tol);
        if (enumerate->parsed()) return do_enumerate(enum_config, horizon);
    } catch (const sedmdp::ResourceError& err) {
        std::cerr << "error: " << err.what() << " (estimated "
                  << sedmdp::format_compact(err.estimated_count) << ", budget "
                  << err.budget_count << ")\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
