// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Criteria 1-4 and 6 delegate to the frozen verify batteries; 5 runs the
// full delayed-vs-oblivious comparison; 7 checks byte-level determinism of
// the run artifacts across invocations and thread counts.

#include "sedmdp/checks.hpp"
#include "sedmdp/envs.hpp"
#include "sedmdp/harness.hpp"
#include "sedmdp/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sedmdp;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

Outcome from_battery(const std::string& suite) {
    const Battery battery = run_battery(suite);
    Outcome out;
    out.passed = battery.all_passed();
    if (out.passed) {
        out.detail = std::to_string(battery.checks.size()) + " checks";
    } else {
        std::ostringstream oss;
        for (const CheckResult& check : battery.checks) {
            if (!check.passed) oss << " [" << check.name << ": " << check.detail << "]";
        }
        out.detail = "failing:" + oss.str();
    }
    return out;
}

// Paired-by-seed comparison: per seed, mean episode return per agent, then a
// 95% normal CI on the per-seed differences. Lower bound must clear zero.
struct PairedCi {
    double mean = 0.0;
    double lower = 0.0;
    int n = 0;
};

PairedCi paired_difference(const std::vector<ResultRow>& rows, const std::string& favored,
                           const std::string& baseline) {
    std::map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>> by_seed;
    for (const ResultRow& row : rows) {
        if (row.agent == favored) by_seed[row.seed].first.push_back(row.undiscounted);
        if (row.agent == baseline) by_seed[row.seed].second.push_back(row.undiscounted);
    }
    std::vector<double> diffs;
    for (const auto& [seed, pair] : by_seed) {
        (void)seed;
        const auto mean = [](const std::vector<double>& v) {
            double sum = 0.0;
            for (double x : v) sum += x;
            return sum / static_cast<double>(v.size());
        };
        diffs.push_back(mean(pair.first) - mean(pair.second));
    }
    PairedCi ci;
    ci.n = static_cast<int>(diffs.size());
    for (double d : diffs) ci.mean += d;
    ci.mean /= static_cast<double>(ci.n);
    double ss = 0.0;
    for (double d : diffs) ss += (d - ci.mean) * (d - ci.mean);
    const double sd = std::sqrt(ss / static_cast<double>(ci.n - 1));
    ci.lower = ci.mean - 1.96 * sd / std::sqrt(static_cast<double>(ci.n));
    return ci;
}

std::string comparison_config(const std::string& delay_spec) {
    return std::string(R"({
      "env": "branch",
      "delay": ")") +
           delay_spec + R"(",
      "agents": ["delayed-mcts", "oblivious-mcts"],
      "episodes": 32,
      "seeds": {"first": 0, "count": 50},
      "max_steps": 120,
      "model": "exact",
      "planner": {"rollout_depth": 30, "mode": "expectimax"}
    })";
}

Outcome criterion5() {
    Outcome out;
    std::ostringstream detail;
    bool ok = true;

    for (const std::string delay_spec : {"constant:5", "walk:5,0.2"}) {
        const ExperimentConfig config = parse_experiment_config(comparison_config(delay_spec));
        RunOptions opts;
        opts.master_seed = 0;
        opts.threads = 4;
        opts.write_files = false;
        const RunResult result = run_experiment(config, opts);
        const PairedCi ci = paired_difference(result.rows, "delayed-mcts", "oblivious-mcts");
        const bool wins = ci.lower > 0.0 && ci.n == 50;
        ok = ok && wins;
        detail << delay_spec << ": mean gap " << format_compact(ci.mean) << ", 95% lower bound "
               << format_compact(ci.lower) << " over " << ci.n << " seeds"
               << (wins ? "" : " (NOT > 0)") << "; ";
    }

    const MdpSpec branch = make_branch_gridworld();
    double previous = 0.0;
    detail << "optimal value by delay:";
    for (int m = 0; m <= 2; ++m) {
        const AugmentedSolution solution = augmented_vi(branch, m, 1e-10);
        const std::vector<int> defaults(static_cast<std::size_t>(m), 0);
        const double value = solution.initial_value(branch, defaults);
        detail << " M=" << m << " " << format_compact(value);
        if (m > 0 && value > previous + 1e-9) {
            ok = false;
            detail << " (INCREASED)";
        }
        previous = value;
    }

    out.passed = ok;
    out.detail = detail.str();
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) return "<missing " + path.filename().string() + ">";
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Outcome criterion7() {
    const std::string config_text = R"({
      "env": "chain:n=5,slip=0.1",
      "delay": "iid:0.2,0.5,0.3",
      "agents": ["delayed-mcts", "oblivious-mcts"],
      "episodes": 4,
      "seeds": {"first": 0, "count": 2},
      "max_steps": 200,
      "model": "tabular",
      "planner": {"n_simulations": 64, "uct_c": 1.4, "rollout_depth": 12, "mode": "sampled"}
    })";
    const ExperimentConfig config = parse_experiment_config(config_text);

    const fs::path root = fs::temp_directory_path() / "sedmdp_acceptance_det";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, int>> variants = {
        {"first", 4}, {"again", 4}, {"single", 1}};
    for (const auto& [name, threads] : variants) {
        RunOptions opts;
        opts.master_seed = 0;
        opts.threads = threads;
        opts.out_override = (root / name).string();
        run_experiment(config, opts);
    }

    std::vector<std::string> files = {"results.csv", "returns_discounted.csv", "summary.json"};
    for (const std::string agent : {"delayed-mcts", "oblivious-mcts"}) {
        for (int seed = 0; seed < 2; ++seed) {
            files.push_back("logs/" + agent + "-seed" + std::to_string(seed) + ".jsonl");
        }
    }

    Outcome out;
    out.passed = true;
    for (const std::string& file : files) {
        const std::string reference = read_file(root / "first" / file);
        for (const std::string other : {"again", "single"}) {
            if (read_file(root / other / file) != reference) {
                out.passed = false;
                out.detail += file + " differs in " + other + "; ";
            }
        }
    }
    if (out.passed) {
        out.detail = std::to_string(files.size()) +
                     " files byte-identical across reruns and thread counts 1/4";
        fs::remove_all(root);
    } else {
        out.detail += "artifacts kept under " + root.string();
    }
    return out;
}

} // namespace

int main() {
    struct Criterion {
        const char* title;
        double budget_s;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"pending-queue ground truth", 60.0, [] { return from_battery("queues"); }},
        {"history probabilities match simulation", 60.0, [] { return from_battery("theorem1"); }},
        {"markov reduction matches history policies", 60.0,
         [] { return from_battery("theorem2"); }},
        {"planner reaches the oracle value", 120.0, [] { return from_battery("planner"); }},
        {"delay awareness wins; delay never helps", 600.0, criterion5},
        {"random-walk delay process", 60.0, [] { return from_battery("walk"); }},
        {"byte-identical run artifacts", 120.0, criterion7},
    };

    bool all_passed = true;
    int index = 0;
    for (const Criterion& criterion : criteria) {
        ++index;
        const double before = now_s();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& error) {
            outcome.passed = false;
            outcome.detail = std::string("exception: ") + error.what();
        }
        const double elapsed = now_s() - before;
        if (elapsed > criterion.budget_s) {
            outcome.passed = false;
            outcome.detail += " (over " + format_compact(criterion.budget_s) + "s budget)";
        }
        all_passed = all_passed && outcome.passed;
        std::printf("criterion %d (%s): %s — %s [%.2fs]\n", index, criterion.title,
                    outcome.passed ? "PASS" : "FAIL", outcome.detail.c_str(), elapsed);
    }
    return all_passed ? 0 : 1;
}
