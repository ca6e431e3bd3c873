// Python surface: environments, exact oracles, the delayed environment loop,
// and the experiment harness. Thin readonly wrappers over the C++ types;
// every operation validates through the same code paths the CLI uses.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sedmdp/checks.hpp"
#include "sedmdp/envs.hpp"
#include "sedmdp/exact.hpp"
#include "sedmdp/harness.hpp"
#include "sedmdp/oracles.hpp"
#include "sedmdp/sed_env.hpp"

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace sedmdp;

namespace {

SedConfig make_config(const MdpSpec& mdp, const std::string& delay_spec,
                      const std::vector<int>& default_queue) {
    auto [delay, kind] = parse_delay_spec(delay_spec);
    (void)kind;
    SedConfig config{mdp, std::move(delay), default_queue};
    config.validate();
    return config;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Simulation and planning for MDPs with stochastic execution delays";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

    py::class_<MdpSpec>(m, "Mdp")
        .def_readonly("n_states", &MdpSpec::n_states)
        .def_readonly("n_actions", &MdpSpec::n_actions)
        .def_readonly("discount", &MdpSpec::discount)
        .def_readonly("name", &MdpSpec::name)
        .def_readonly("initial", &MdpSpec::initial)
        .def("p", &MdpSpec::p, py::arg("s"), py::arg("a"), py::arg("next"))
        .def("reward", &MdpSpec::reward, py::arg("s"), py::arg("a"))
        .def("is_terminal", &MdpSpec::is_terminal, py::arg("s"))
        .def("validate", &MdpSpec::validate)
        .def("__repr__",
             [](const MdpSpec& mdp) { return "Mdp(" + mdp.name + ")"; });

    m.def("chain", &make_chain, py::arg("n"), py::arg("slip"), py::arg("discount") = 0.9);
    m.def("gridworld", &make_gridworld, py::arg("w"), py::arg("h"), py::arg("slip"),
          py::arg("goal"), py::arg("pits"), py::arg("start") = 0, py::arg("discount") = 0.95);
    m.def("branch_gridworld", &make_branch_gridworld, py::arg("slip") = 0.1,
          py::arg("discount") = 0.97);
    m.def("resolve_env", &resolve_env, py::arg("spec"),
          "Builtin form like 'chain:n=5,slip=0.1' or a path to a JSON document");

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("fork", &RngStream::fork, py::arg("label"))
        .def("uniform01", &RngStream::uniform01)
        .def("uniform_int", &RngStream::uniform_int, py::arg("n"))
        .def("categorical",
             [](RngStream& rng, const std::vector<double>& probs) {
                 return rng.categorical(probs);
             },
             py::arg("probs"));

    py::class_<StepOutcome>(m, "StepOutcome")
        .def_readonly("next_state", &StepOutcome::next_state)
        .def_readonly("reward", &StepOutcome::reward)
        .def_readonly("executed_action", &StepOutcome::executed_action)
        .def_readonly("decision_time", &StepOutcome::decision_time)
        .def_readonly("next_delay", &StepOutcome::next_delay)
        .def_readonly("terminal", &StepOutcome::terminal);

    py::class_<SedEnv>(m, "Env")
        .def(py::init([](const MdpSpec& mdp, const std::string& delay,
                         const std::vector<int>& default_queue) {
                 return SedEnv(make_config(mdp, delay, default_queue));
             }),
             py::arg("mdp"), py::arg("delay"), py::arg("default_queue"),
             "delay is a spec string: 'constant:M', 'iid:p0,p1,...', or 'walk:M,p'")
        .def("reset", &SedEnv::reset, py::arg("rng"), py::arg("carryover") = false)
        .def("install_default_queue", &SedEnv::install_default_queue, py::arg("actions"))
        .def("step", &SedEnv::step, py::arg("decided_action"), py::arg("rng"))
        .def_property_readonly("state", &SedEnv::state)
        .def_property_readonly("delay", &SedEnv::delay)
        .def_property_readonly("time", &SedEnv::time)
        .def_property_readonly("done", &SedEnv::done);

    m.def("effective_decision_time",
          [](const std::vector<int>& delays, int max_delay, std::int64_t l) {
              return effective_decision_time_for(delays, max_delay, l);
          },
          py::arg("delays"), py::arg("max_delay"), py::arg("step"),
          "Latest decision time whose action lands by the given step; negative "
          "means a default action executes");

    m.def("enumerate_uniform_histories",
          [](const MdpSpec& mdp, const std::string& delay,
             const std::vector<int>& default_queue, int horizon) {
              const SedConfig config = make_config(mdp, delay, default_queue);
              const UniformPolicy uniform(mdp.n_actions);
              py::list out;
              for (const WeightedHistory& wh : enumerate_histories(config, uniform, horizon)) {
                  out.append(py::make_tuple(wh.probability, wh.history.states,
                                            wh.history.delays, wh.history.actions));
              }
              return out;
          },
          py::arg("mdp"), py::arg("delay"), py::arg("default_queue"), py::arg("horizon"),
          "All positive-probability histories under the uniform policy as "
          "(probability, states, delays, executed_actions) tuples");

    py::class_<ValueSolution>(m, "ValueSolution")
        .def_readonly("values", &ValueSolution::values)
        .def_readonly("greedy", &ValueSolution::greedy)
        .def_readonly("iterations", &ValueSolution::iterations)
        .def_readonly("residual", &ValueSolution::residual);

    m.def("value_iteration", &value_iteration, py::arg("mdp"), py::arg("tol") = 1e-10,
          py::arg("max_iterations") = 1000000);

    py::class_<AugmentedSolution>(m, "AugmentedSolution")
        .def_readonly("n_states", &AugmentedSolution::n_states)
        .def_readonly("n_actions", &AugmentedSolution::n_actions)
        .def_readonly("max_delay", &AugmentedSolution::max_delay)
        .def_readonly("n_augmented", &AugmentedSolution::n_augmented)
        .def_readonly("values", &AugmentedSolution::values)
        .def_readonly("greedy", &AugmentedSolution::greedy)
        .def_readonly("iterations", &AugmentedSolution::iterations)
        .def_readonly("residual", &AugmentedSolution::residual)
        .def("encode",
             [](const AugmentedSolution& solution, int s, const std::vector<int>& queue) {
                 return solution.encode(s, queue);
             },
             py::arg("s"), py::arg("queue"))
        .def("decode", &AugmentedSolution::decode, py::arg("id"))
        .def("value_at",
             [](const AugmentedSolution& solution, int s, const std::vector<int>& queue) {
                 return solution.value_at(s, queue);
             },
             py::arg("s"), py::arg("queue"))
        .def("initial_value",
             [](const AugmentedSolution& solution, const MdpSpec& mdp,
                const std::vector<int>& default_queue) {
                 return solution.initial_value(mdp, default_queue);
             },
             py::arg("mdp"), py::arg("default_queue"));

    m.def("augmented_vi", &augmented_vi, py::arg("mdp"), py::arg("max_delay"),
          py::arg("tol") = 1e-10, py::arg("max_augmented_states") = 20'000'000);

    py::class_<ResultRow>(m, "ResultRow")
        .def_readonly("run_id", &ResultRow::run_id)
        .def_readonly("env", &ResultRow::env)
        .def_readonly("agent", &ResultRow::agent)
        .def_readonly("delay_kind", &ResultRow::delay_kind)
        .def_readonly("max_delay", &ResultRow::max_delay)
        .def_readonly("seed", &ResultRow::seed)
        .def_readonly("episode", &ResultRow::episode)
        .def_readonly("undiscounted", &ResultRow::undiscounted)
        .def_readonly("discounted", &ResultRow::discounted)
        .def_readonly("steps", &ResultRow::steps);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("run_id", &RunResult::run_id)
        .def_readonly("out_dir", &RunResult::out_dir)
        .def_readonly("rows", &RunResult::rows)
        .def_readonly("total_interactions", &RunResult::total_interactions);

    m.def("run_experiment",
          [](const std::string& config_text, std::uint64_t master_seed, int threads,
             const std::optional<std::string>& out, bool write_files) {
              const ExperimentConfig config = parse_experiment_config(config_text);
              RunOptions opts;
              opts.master_seed = master_seed;
              opts.threads = threads;
              if (out) opts.out_override = *out;
              opts.write_files = write_files;
              return run_experiment(config, opts);
          },
          py::arg("config"), py::arg("master_seed") = 0, py::arg("threads") = 1,
          py::arg("out") = std::nullopt, py::arg("write_files") = true,
          py::call_guard<py::gil_scoped_release>(),
          "config is the experiment document as JSON text");

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("detail", &CheckResult::detail)
        .def("__repr__", [](const CheckResult& check) {
            return std::string(check.passed ? "[ OK ] " : "[FAIL] ") + check.name;
        });

    py::class_<Battery>(m, "Battery")
        .def_readonly("suite", &Battery::suite)
        .def_readonly("checks", &Battery::checks)
        .def("all_passed", &Battery::all_passed);

    m.def("verify", &run_battery, py::arg("suite"), py::arg("seed") = 0,
          py::call_guard<py::gil_scoped_release>(),
          "Runs a named check battery: queues, theorem1, theorem2, planner, or walk");
}
