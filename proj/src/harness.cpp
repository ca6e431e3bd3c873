#include "sedmdp/harness.hpp"

#include "sedmdp/envs.hpp"

#include "json.hpp"

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sedmdp {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_int_strict(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(what);
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": not an integer: '" + text + "'");
    }
}

double parse_double_strict(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(what);
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": not a number: '" + text + "'");
    }
}

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (!known.count(key)) {
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
        }
    }
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

struct CellOutput {
    std::vector<ResultRow> rows;
    std::string jsonl;
    std::int64_t interactions = 0;
    std::string log_name;
};

CellOutput run_cell(const ExperimentConfig& config, AgentKind kind, std::uint64_t seed,
                    const RunOptions& opts, const std::string& run_id) {
    const std::string agent_name = to_string(kind);
    const int max_delay = config.delay.max_delay();
    RngStream cell_root = RngStream(opts.master_seed)
                              .fork("run/agent=" + agent_name + "/seed=" + std::to_string(seed));

    SedEnv env(SedConfig{config.mdp, config.delay, config.default_queue});
    ForwardModel model =
        config.exact_model
            ? ForwardModel::exact(config.mdp, config.prediction)
            : ForwardModel::tabular(config.mdp.n_states, config.mdp.n_actions,
                                    config.model_alpha, config.prediction);
    AgentState agent(kind, std::move(model), config.planner, config.learning,
                     config.default_queue, max_delay);

    CellOutput out;
    out.log_name = agent_name + "-seed" + std::to_string(seed) + ".jsonl";
    std::ostringstream log;

    for (int episode = 0; episode < config.episodes; ++episode) {
        RngStream ep = cell_root.fork("episode=" + std::to_string(episode));
        const bool carryover = config.delay_kind == "walk" && episode > 0;
        env.reset(ep, carryover);

        std::vector<int> defaults = config.default_queue;
        if (agent.delay_aware() && config.bootstrap_queue && max_delay > 0 && !env.done()) {
            defaults = agent.plan_initial_queue(env.state(), ep);
            env.install_default_queue(defaults);
        }
        agent.begin_episode(defaults);

        EpisodeRecord record;
        int t = 0;
        while (!env.done() && t < config.max_steps) {
            const int s = env.state();
            const int z = env.delay();
            const int decided = agent.act(s, z, ep, env.time());
            const StepOutcome step = env.step(decided, ep);
            StepRecord sr;
            sr.t = t;
            sr.state = s;
            sr.delay = z;
            sr.decided_action = decided;
            sr.executed_action = step.executed_action;
            sr.decision_time = step.decision_time;
            sr.reward = step.reward;
            record.steps.push_back(sr);
            ++t;
        }
        record.final_state = env.state();
        record.final_delay = env.delay();
        agent.observe_episode(record, defaults);

        for (const StepRecord& sr : record.steps) {
            ordered line;
            line["t"] = sr.t;
            line["s"] = sr.state;
            line["z"] = sr.delay;
            line["a_decided"] = sr.decided_action;
            line["tau"] = sr.decision_time;
            line["a_executed"] = sr.executed_action;
            line["r"] = sr.reward;
            log << line.dump() << '\n';
        }

        ResultRow row;
        row.run_id = run_id;
        row.env = config.mdp.name;
        row.agent = agent_name;
        row.delay_kind = config.delay_kind;
        row.max_delay = max_delay;
        row.seed = seed;
        row.episode = episode;
        row.undiscounted = record.undiscounted_return();
        row.discounted = record.discounted_return(config.mdp.discount);
        row.steps = static_cast<int>(record.steps.size());
        out.rows.push_back(std::move(row));
        out.interactions += static_cast<std::int64_t>(record.steps.size());
    }
    out.jsonl = log.str();
    return out;
}

} // namespace

std::string format_compact(double x) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x);
    if (ec != std::errc()) throw std::logic_error("format_compact: conversion failed");
    return std::string(buffer, ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::pair<DelayProcess, std::string> parse_delay_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument(
            "delay spec '" + spec + "' needs the form constant:M, iid:p0,p1,..., or walk:M,p");
    }
    const std::string kind = spec.substr(0, colon);
    const std::string args = spec.substr(colon + 1);
    if (kind == "constant") {
        const int m = parse_int_strict(args, "delay spec constant:M");
        return {DelayProcess::constant(m), "constant"};
    }
    if (kind == "iid") {
        std::vector<double> probs;
        for (const std::string& part : split(args, ',')) {
            probs.push_back(parse_double_strict(part, "delay spec iid probability"));
        }
        return {DelayProcess::iid(std::move(probs)), "iid"};
    }
    if (kind == "walk") {
        const std::vector<std::string> parts = split(args, ',');
        if (parts.size() != 2) {
            throw std::invalid_argument("delay spec walk needs walk:M,p, got '" + spec + "'");
        }
        const int m = parse_int_strict(parts[0], "delay spec walk M");
        const double p = parse_double_strict(parts[1], "delay spec walk p");
        return {DelayProcess::random_walk(m, p, p), "walk"};
    }
    throw std::invalid_argument("unknown delay kind '" + kind + "' in spec '" + spec + "'");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw std::invalid_argument(std::string("experiment config parse error: ") + err.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    reject_unknown_keys(doc,
                        {"env", "delay", "agents", "episodes", "seeds", "max_steps",
                         "default_queue", "bootstrap_queue", "model", "model_alpha",
                         "prediction", "planner", "learning", "out"},
                        "experiment config");

    ExperimentConfig config;
    if (!doc.contains("env") || !doc["env"].is_string()) {
        throw std::invalid_argument("experiment config needs an 'env' string");
    }
    config.env_spec = doc["env"].get<std::string>();
    config.mdp = resolve_env(config.env_spec);

    if (!doc.contains("delay") || !doc["delay"].is_string()) {
        throw std::invalid_argument("experiment config needs a 'delay' string");
    }
    config.delay_spec = doc["delay"].get<std::string>();
    auto [delay, kind] = parse_delay_spec(config.delay_spec);
    config.delay = std::move(delay);
    config.delay_kind = std::move(kind);
    const int max_delay = config.delay.max_delay();

    if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].empty()) {
        throw std::invalid_argument("experiment config needs a non-empty 'agents' array");
    }
    std::set<std::string> seen_agents;
    for (const json& entry : doc["agents"]) {
        if (!entry.is_string()) throw std::invalid_argument("agent names must be strings");
        const std::string name = entry.get<std::string>();
        if (!seen_agents.insert(name).second) {
            throw std::invalid_argument("agent '" + name + "' listed twice");
        }
        config.agents.push_back(agent_kind_from_string(name));
    }

    config.episodes = doc.value("episodes", 1);
    if (config.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    config.max_steps = doc.value("max_steps", 500);
    if (config.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");

    if (!doc.contains("seeds")) throw std::invalid_argument("experiment config needs 'seeds'");
    const json& seeds = doc["seeds"];
    if (seeds.is_array()) {
        for (const json& entry : seeds) {
            if (!entry.is_number_unsigned()) {
                throw std::invalid_argument("seeds must be non-negative integers");
            }
            config.seeds.push_back(entry.get<std::uint64_t>());
        }
    } else if (seeds.is_object()) {
        reject_unknown_keys(seeds, {"first", "count"}, "seeds");
        if (!seeds.contains("first") || !seeds.contains("count")) {
            throw std::invalid_argument("seeds object needs 'first' and 'count'");
        }
        const std::uint64_t first = seeds["first"].get<std::uint64_t>();
        const std::int64_t count = seeds["count"].get<std::int64_t>();
        if (count < 1) throw std::invalid_argument("seeds count must be >= 1");
        for (std::int64_t i = 0; i < count; ++i) {
            config.seeds.push_back(first + static_cast<std::uint64_t>(i));
        }
    } else {
        throw std::invalid_argument("seeds must be an array or {first, count}");
    }
    if (config.seeds.empty()) throw std::invalid_argument("need at least one seed");
    if (std::set<std::uint64_t>(config.seeds.begin(), config.seeds.end()).size() !=
        config.seeds.size()) {
        throw std::invalid_argument("seed list contains duplicates");
    }

    if (doc.contains("default_queue")) {
        if (!doc["default_queue"].is_array()) {
            throw std::invalid_argument("default_queue must be an array of actions");
        }
        for (const json& entry : doc["default_queue"]) {
            config.default_queue.push_back(entry.get<int>());
        }
    } else {
        config.default_queue.assign(static_cast<std::size_t>(max_delay), 0);
    }

    config.bootstrap_queue = doc.value("bootstrap_queue", true);

    const std::string model = doc.value("model", std::string("tabular"));
    if (model == "exact") config.exact_model = true;
    else if (model == "tabular") config.exact_model = false;
    else throw std::invalid_argument("model must be 'exact' or 'tabular', got '" + model + "'");
    config.model_alpha = doc.value("model_alpha", 1.0);
    if (config.model_alpha < 0.0) throw std::invalid_argument("model_alpha must be >= 0");

    const std::string prediction = doc.value("prediction", std::string("mode"));
    if (prediction == "mode") config.prediction = PredictionMode::Mode;
    else if (prediction == "sample") config.prediction = PredictionMode::Sample;
    else {
        throw std::invalid_argument("prediction must be 'mode' or 'sample', got '" + prediction +
                                    "'");
    }

    if (doc.contains("planner")) {
        const json& planner = doc["planner"];
        if (!planner.is_object()) throw std::invalid_argument("planner must be an object");
        reject_unknown_keys(planner, {"n_simulations", "uct_c", "rollout_depth", "mode"},
                            "planner");
        config.planner.n_simulations = planner.value("n_simulations", config.planner.n_simulations);
        config.planner.uct_c = planner.value("uct_c", config.planner.uct_c);
        config.planner.rollout_depth = planner.value("rollout_depth", config.planner.rollout_depth);
        const std::string mode = planner.value("mode", std::string("sampled"));
        if (mode == "sampled") config.planner.mode = MctsMode::SampledTransitions;
        else if (mode == "expectimax") config.planner.mode = MctsMode::ExpectimaxToDepth;
        else {
            throw std::invalid_argument("planner mode must be 'sampled' or 'expectimax', got '" +
                                        mode + "'");
        }
    }
    config.planner.discount = config.mdp.discount;
    config.planner.validate();

    if (doc.contains("learning")) {
        const json& learning = doc["learning"];
        if (!learning.is_object()) throw std::invalid_argument("learning must be an object");
        reject_unknown_keys(learning, {"learning_rate", "epsilon"}, "learning");
        config.learning.learning_rate = learning.value("learning_rate", config.learning.learning_rate);
        config.learning.epsilon = learning.value("epsilon", config.learning.epsilon);
    }
    if (config.learning.learning_rate <= 0.0 || config.learning.learning_rate > 1.0) {
        throw std::invalid_argument("learning_rate must be in (0, 1]");
    }
    if (config.learning.epsilon < 0.0 || config.learning.epsilon > 1.0) {
        throw std::invalid_argument("epsilon must be in [0, 1]");
    }

    config.out_dir = doc.value("out", std::string());

    // The queue must agree with the delay process and the action set.
    SedConfig{config.mdp, config.delay, config.default_queue}.validate();

    ordered canon;
    canon["env"] = config.env_spec;
    canon["delay"] = config.delay_spec;
    ordered agent_names = ordered::array();
    for (AgentKind kind : config.agents) agent_names.push_back(to_string(kind));
    canon["agents"] = agent_names;
    canon["episodes"] = config.episodes;
    canon["seeds"] = config.seeds;
    canon["max_steps"] = config.max_steps;
    canon["default_queue"] = config.default_queue;
    canon["bootstrap_queue"] = config.bootstrap_queue;
    canon["model"] = config.exact_model ? "exact" : "tabular";
    canon["model_alpha"] = config.model_alpha;
    canon["prediction"] = config.prediction == PredictionMode::Mode ? "mode" : "sample";
    canon["planner"] = {{"n_simulations", config.planner.n_simulations},
                        {"uct_c", config.planner.uct_c},
                        {"rollout_depth", config.planner.rollout_depth},
                        {"mode", config.planner.mode == MctsMode::SampledTransitions
                                     ? "sampled"
                                     : "expectimax"}};
    canon["learning"] = {{"learning_rate", config.learning.learning_rate},
                         {"epsilon", config.learning.epsilon}};
    config.canonical = canon.dump();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open experiment config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_experiment_config(buffer.str());
    } catch (const std::invalid_argument& err) {
        throw std::invalid_argument(path + ": " + err.what());
    }
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& opts) {
    if (opts.threads < 1) throw std::invalid_argument("threads must be >= 1");

    char run_hex[17];
    std::snprintf(run_hex, sizeof(run_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(
                      config.canonical + "|seed=" + std::to_string(opts.master_seed))));
    RunResult result;
    result.run_id = run_hex;

    struct Cell {
        AgentKind kind;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (AgentKind kind : config.agents) {
        for (std::uint64_t seed : config.seeds) cells.push_back({kind, seed});
    }

    std::vector<CellOutput> outputs(cells.size());
    std::vector<std::exception_ptr> failures(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                outputs[i] = run_cell(config, cells[i].kind, cells[i].seed, opts, result.run_id);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(opts.threads, static_cast<int>(cells.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    for (const std::exception_ptr& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    for (const CellOutput& out : outputs) {
        result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
        result.total_interactions += out.interactions;
    }

    if (!opts.write_files) return result;

    namespace fs = std::filesystem;
    std::string out_dir = !opts.out_override.empty() ? opts.out_override
                          : !config.out_dir.empty() ? config.out_dir
                                                    : "runs/" + result.run_id;
    result.out_dir = out_dir;
    fs::create_directories(fs::path(out_dir) / "logs");

    {
        std::ofstream csv(fs::path(out_dir) / "results.csv", std::ios::binary);
        std::ofstream discounted(fs::path(out_dir) / "returns_discounted.csv", std::ios::binary);
        csv << "run_id,env,agent,delay_kind,M,seed,episode,return,steps\n";
        discounted << "run_id,env,agent,delay_kind,M,seed,episode,return_discounted,steps\n";
        for (const ResultRow& row : result.rows) {
            const std::string prefix = csv_field(row.run_id) + ',' + csv_field(row.env) + ',' +
                                       csv_field(row.agent) + ',' + csv_field(row.delay_kind) +
                                       ',' + std::to_string(row.max_delay) + ',' +
                                       std::to_string(row.seed) + ',' +
                                       std::to_string(row.episode) + ',';
            csv << prefix << format_compact(row.undiscounted) << ',' << row.steps << '\n';
            discounted << prefix << format_compact(row.discounted) << ',' << row.steps << '\n';
        }
    }

    for (const CellOutput& out : outputs) {
        std::ofstream log(fs::path(out_dir) / "logs" / out.log_name, std::ios::binary);
        log << out.jsonl;
    }

    ordered summary;
    summary["run_id"] = result.run_id;
    summary["env"] = config.mdp.name;
    summary["env_spec"] = config.env_spec;
    summary["delay"] = config.delay_spec;
    summary["max_delay"] = config.delay.max_delay();
    ordered agent_names = ordered::array();
    for (AgentKind kind : config.agents) agent_names.push_back(to_string(kind));
    summary["agents"] = agent_names;
    summary["episodes_per_seed"] = config.episodes;
    summary["seeds"] = config.seeds;
    summary["master_seed"] = opts.master_seed;
    summary["total_interactions"] = result.total_interactions;
    ordered per_agent = ordered::object();
    for (AgentKind kind : config.agents) {
        const std::string name = to_string(kind);
        double sum = 0.0;
        double sum_discounted = 0.0;
        std::int64_t count = 0;
        for (const ResultRow& row : result.rows) {
            if (row.agent != name) continue;
            sum += row.undiscounted;
            sum_discounted += row.discounted;
            ++count;
        }
        per_agent[name] = {{"episodes", count},
                           {"mean_return", count ? sum / static_cast<double>(count) : 0.0},
                           {"mean_discounted",
                            count ? sum_discounted / static_cast<double>(count) : 0.0}};
    }
    summary["per_agent"] = per_agent;
    std::ofstream summary_file(fs::path(out_dir) / "summary.json", std::ios::binary);
    summary_file << summary.dump(2) << '\n';

    return result;
}

} // namespace sedmdp
