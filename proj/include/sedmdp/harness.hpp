#pragma once

#include "sedmdp/planning.hpp"
#include "sedmdp/sed_env.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sedmdp {

// A full experiment description, parsed and validated up front so bad
// configurations fail before any work starts.
struct ExperimentConfig {
    std::string env_spec;          // as written in the document
    MdpSpec mdp;                   // resolved environment
    DelayProcess delay = DelayProcess::constant(0);  // prototype; workers copy it
    std::string delay_spec;        // as written, e.g. "walk:5,0.2"
    std::string delay_kind;        // "constant" | "iid" | "walk"
    std::vector<AgentKind> agents; // at least one, in document order
    int episodes = 1;              // per (agent, seed) cell
    std::vector<std::uint64_t> seeds;
    int max_steps = 500;           // per-episode step cap
    std::vector<int> default_queue; // M entries
    bool bootstrap_queue = true;   // delay-aware agents plan their first M actions
    bool exact_model = false;      // true: planners see the true dynamics
    double model_alpha = 1.0;      // Laplace smoothing for learned models
    PredictionMode prediction = PredictionMode::Mode;
    MctsConfig planner;            // discount is overwritten with the MDP's
    QLearningConfig learning;
    std::string out_dir;           // empty: runs/<run_id>
    std::string canonical;         // canonical serialization, hashed into run_id
};

// "constant:M" | "iid:p0,p1,..." | "walk:M,p"; the second value names the kind.
std::pair<DelayProcess, std::string> parse_delay_spec(const std::string& spec);

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

struct ResultRow {
    std::string run_id;
    std::string env;
    std::string agent;
    std::string delay_kind;
    int max_delay = 0;
    std::uint64_t seed = 0;
    int episode = 0;
    double undiscounted = 0.0;
    double discounted = 0.0;
    int steps = 0;
};

struct RunOptions {
    std::uint64_t master_seed = 0;
    int threads = 1;
    std::string out_override;  // non-empty: replaces the config's output dir
    bool write_files = true;
};

struct RunResult {
    std::string run_id;
    std::string out_dir;
    std::vector<ResultRow> rows;  // (agent, seed, episode) in document order
    std::int64_t total_interactions = 0;
};

// Runs every (agent, seed) cell of the experiment, optionally fanned out
// across threads. Outputs are byte-identical for a fixed (config, seed)
// regardless of thread count: every cell derives its randomness from its own
// named sub-stream and results merge in document order. Writes results.csv,
// returns_discounted.csv, per-cell JSON-lines step logs, and summary.json
// under the output directory.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& opts);

// Shortest decimal form of x that parses back to exactly x (CSV/JSON output).
std::string format_compact(double x);

// FNV-1a over bytes; run ids are the hex form over (canonical config, seed).
std::uint64_t fnv1a64(const std::string& bytes);

} // namespace sedmdp
