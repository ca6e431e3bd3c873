#include "sedmdp/envs.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sedmdp {

namespace {

using nlohmann::json;

[[noreturn]] void doc_fail(const std::string& what) {
    throw std::invalid_argument("mdp document: " + what);
}

const json& require_key(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) doc_fail(std::string("missing required key \"") + key + "\"");
    return *it;
}

int require_int(const json& doc, const char* key) {
    const json& v = require_key(doc, key);
    if (!v.is_number_integer()) doc_fail(std::string("key \"") + key + "\" must be an integer");
    return v.get<int>();
}

std::string format_num(double v) {
    std::ostringstream oss;
    oss << v;
    return oss.str();
}

} // namespace

MdpSpec parse_mdp_document(const std::string& text, const std::string& fallback_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream oss;
        oss << "mdp document parse error at byte " << e.byte << ": " << e.what();
        throw std::invalid_argument(oss.str());
    }
    if (!doc.is_object()) doc_fail("top level must be an object");
    const int version = require_int(doc, "format_version");
    if (version != 1) {
        doc_fail("unsupported format_version " + std::to_string(version) + " (expected 1)");
    }

    MdpSpec mdp;
    mdp.n_states = require_int(doc, "n_states");
    mdp.n_actions = require_int(doc, "n_actions");
    if (mdp.n_states < 1 || mdp.n_actions < 1) {
        doc_fail("n_states and n_actions must be positive");
    }
    const auto ns = static_cast<std::size_t>(mdp.n_states);
    const auto na = static_cast<std::size_t>(mdp.n_actions);

    const json& p = require_key(doc, "P");
    if (!p.is_array() || p.size() != ns) {
        doc_fail("P must be an array of n_states entries");
    }
    mdp.transitions.reserve(ns * na * ns);
    for (std::size_t s = 0; s < ns; ++s) {
        const json& per_action = p[s];
        if (!per_action.is_array() || per_action.size() != na) {
            doc_fail("P[" + std::to_string(s) + "] must be an array of n_actions rows");
        }
        for (std::size_t a = 0; a < na; ++a) {
            const json& row = per_action[a];
            if (!row.is_array() || row.size() != ns) {
                doc_fail("P[" + std::to_string(s) + "][" + std::to_string(a) +
                         "] must be an array of n_states probabilities");
            }
            for (const json& v : row) {
                if (!v.is_number()) doc_fail("P entries must be numbers");
                mdp.transitions.push_back(v.get<double>());
            }
        }
    }

    const json& r = require_key(doc, "r");
    if (!r.is_array() || r.size() != ns) {
        doc_fail("r must be an array of n_states rows");
    }
    mdp.rewards.reserve(ns * na);
    for (std::size_t s = 0; s < ns; ++s) {
        const json& row = r[s];
        if (!row.is_array() || row.size() != na) {
            doc_fail("r[" + std::to_string(s) + "] must be an array of n_actions rewards");
        }
        for (const json& v : row) {
            if (!v.is_number()) doc_fail("r entries must be numbers");
            mdp.rewards.push_back(v.get<double>());
        }
    }

    const json& mu = require_key(doc, "mu");
    if (!mu.is_array() || mu.size() != ns) {
        doc_fail("mu must be an array of n_states probabilities");
    }
    for (const json& v : mu) {
        if (!v.is_number()) doc_fail("mu entries must be numbers");
        mdp.initial.push_back(v.get<double>());
    }

    const json& gamma = require_key(doc, "gamma");
    if (!gamma.is_number()) doc_fail("gamma must be a number");
    mdp.discount = gamma.get<double>();

    mdp.terminal.assign(ns, 0);
    if (auto it = doc.find("terminal"); it != doc.end()) {
        if (!it->is_array()) doc_fail("terminal must be an array of state indices");
        for (const json& v : *it) {
            if (!v.is_number_integer()) doc_fail("terminal entries must be integers");
            const int s = v.get<int>();
            if (s < 0 || s >= mdp.n_states) {
                doc_fail("terminal state index " + std::to_string(s) + " out of range");
            }
            mdp.terminal[static_cast<std::size_t>(s)] = 1;
        }
    }

    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) doc_fail("name must be a string");
        mdp.name = it->get<std::string>();
    } else {
        mdp.name = fallback_name;
    }

    mdp.validate();
    return mdp;
}

MdpSpec load_mdp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open mdp document: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_mdp_document(buf.str(), std::filesystem::path(path).stem().string());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::string mdp_to_document(const MdpSpec& mdp) {
    mdp.validate();
    json doc;
    doc["format_version"] = 1;
    doc["n_states"] = mdp.n_states;
    doc["n_actions"] = mdp.n_actions;
    json p = json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        json per_action = json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            auto row = mdp.row(s, a);
            per_action.push_back(json(std::vector<double>(row.begin(), row.end())));
        }
        p.push_back(std::move(per_action));
    }
    doc["P"] = std::move(p);
    json r = json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        std::vector<double> row;
        for (int a = 0; a < mdp.n_actions; ++a) row.push_back(mdp.reward(s, a));
        r.push_back(json(row));
    }
    doc["r"] = std::move(r);
    doc["mu"] = mdp.initial;
    doc["gamma"] = mdp.discount;
    std::vector<int> terminal;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.is_terminal(s)) terminal.push_back(s);
    }
    if (!terminal.empty()) doc["terminal"] = terminal;
    if (!mdp.name.empty()) doc["name"] = mdp.name;
    return doc.dump(2);
}

MdpSpec make_chain(int n, double slip, double discount) {
    if (n < 2) throw std::invalid_argument("chain needs at least 2 states, got " + std::to_string(n));
    if (!(slip >= 0.0 && slip <= 0.5)) {
        throw std::invalid_argument("chain slip must be in [0, 0.5], got " + format_num(slip));
    }
    MdpSpec mdp;
    mdp.n_states = n;
    mdp.n_actions = 2;
    mdp.discount = discount;
    const auto ns = static_cast<std::size_t>(n);
    mdp.transitions.assign(ns * 2 * ns, 0.0);
    mdp.rewards.assign(ns * 2, 0.0);
    mdp.initial.assign(ns, 0.0);
    mdp.initial[0] = 1.0;
    mdp.terminal.assign(ns, 0);
    mdp.terminal[ns - 1] = 1;

    auto entry = [&](int s, int a, int next) -> double& {
        return mdp.transitions[(static_cast<std::size_t>(s) * 2 + a) * ns + next];
    };
    const int goal = n - 1;
    for (int s = 0; s < n; ++s) {
        if (s == goal) {
            for (int a = 0; a < 2; ++a) entry(s, a, s) = 1.0;
            continue;
        }
        const int left = std::max(s - 1, 0);
        const int right = std::min(s + 1, n - 1);
        // action 0 intends left, action 1 intends right; slip reverses.
        entry(s, 0, left) += 1.0 - slip;
        entry(s, 0, right) += slip;
        entry(s, 1, right) += 1.0 - slip;
        entry(s, 1, left) += slip;
        for (int a = 0; a < 2; ++a) {
            mdp.rewards[static_cast<std::size_t>(s) * 2 + a] = entry(s, a, goal);
        }
    }
    mdp.name = "chain(n=" + std::to_string(n) + ",slip=" + format_num(slip) + ")";
    mdp.validate();
    return mdp;
}

MdpSpec make_gridworld(int w, int h, double slip, int goal, const std::vector<int>& pits,
                       int start, double discount) {
    if (w < 2 || h < 2) {
        throw std::invalid_argument("gridworld dimensions must be at least 2x2, got " +
                                    std::to_string(w) + "x" + std::to_string(h));
    }
    if (!(slip >= 0.0 && slip <= 1.0)) {
        throw std::invalid_argument("gridworld slip must be in [0, 1], got " + format_num(slip));
    }
    const int n = w * h;
    auto check_cell = [&](int id, const char* what) {
        if (id < 0 || id >= n) {
            throw std::invalid_argument(std::string(what) + " cell " + std::to_string(id) +
                                        " out of range for " + std::to_string(w) + "x" +
                                        std::to_string(h) + " grid");
        }
    };
    check_cell(goal, "goal");
    check_cell(start, "start");
    std::vector<std::uint8_t> is_pit(static_cast<std::size_t>(n), 0);
    for (int pit : pits) {
        check_cell(pit, "pit");
        if (pit == goal) throw std::invalid_argument("pit cell " + std::to_string(pit) + " overlaps the goal");
        if (is_pit[static_cast<std::size_t>(pit)]) {
            throw std::invalid_argument("duplicate pit cell " + std::to_string(pit));
        }
        is_pit[static_cast<std::size_t>(pit)] = 1;
    }
    if (start == goal || is_pit[static_cast<std::size_t>(start)]) {
        throw std::invalid_argument("start cell " + std::to_string(start) + " must not be terminal");
    }

    MdpSpec mdp;
    mdp.n_states = n;
    mdp.n_actions = 4;
    mdp.discount = discount;
    const auto ns = static_cast<std::size_t>(n);
    mdp.transitions.assign(ns * 4 * ns, 0.0);
    mdp.rewards.assign(ns * 4, 0.0);
    mdp.initial.assign(ns, 0.0);
    mdp.initial[static_cast<std::size_t>(start)] = 1.0;
    mdp.terminal.assign(ns, 0);
    mdp.terminal[static_cast<std::size_t>(goal)] = 1;
    for (int pit : pits) mdp.terminal[static_cast<std::size_t>(pit)] = 1;

    // Actions 0..3: up, down, left, right (up decreases y; id = y*w + x).
    static constexpr int dx[4] = {0, 0, -1, 1};
    static constexpr int dy[4] = {-1, 1, 0, 0};
    // Lateral slips of a vertical move are the horizontal moves and vice versa.
    static constexpr int lat[4][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};
    auto dest = [&](int s, int dir) {
        const int x = s % w + dx[dir];
        const int y = s / w + dy[dir];
        if (x < 0 || x >= w || y < 0 || y >= h) return s;  // walls bounce
        return y * w + x;
    };
    auto entry = [&](int s, int a, int next) -> double& {
        return mdp.transitions[(static_cast<std::size_t>(s) * 4 + a) * ns + next];
    };
    auto bonus = [&](int next) {
        if (next == goal) return 1.0;
        if (is_pit[static_cast<std::size_t>(next)]) return -1.0;
        return 0.0;
    };
    for (int s = 0; s < n; ++s) {
        if (mdp.is_terminal(s)) {
            for (int a = 0; a < 4; ++a) entry(s, a, s) = 1.0;
            continue;
        }
        for (int a = 0; a < 4; ++a) {
            entry(s, a, dest(s, a)) += 1.0 - slip;
            entry(s, a, dest(s, lat[a][0])) += slip / 2.0;
            entry(s, a, dest(s, lat[a][1])) += slip / 2.0;
            double expected = 0.0;
            for (int next = 0; next < n; ++next) expected += entry(s, a, next) * bonus(next);
            mdp.rewards[static_cast<std::size_t>(s) * 4 + a] = expected;
        }
    }
    std::ostringstream name;
    name << "gridworld(w=" << w << ",h=" << h << ",slip=" << format_num(slip) << ",goal=" << goal
         << ",pits=";
    for (std::size_t i = 0; i < pits.size(); ++i) name << (i ? ";" : "") << pits[i];
    name << ",start=" << start << ")";
    mdp.name = name.str();
    mdp.validate();
    return mdp;
}

MdpSpec make_branch_gridworld(double slip, double discount) {
    // Start mid-left, goal one row above the corridor's far end, pits just
    // past the fork: overshooting the turn is punished.
    MdpSpec mdp = make_gridworld(7, 5, slip, /*goal=*/12, /*pits=*/{20, 27}, /*start=*/14, discount);
    mdp.name = "branch(slip=" + format_num(slip) + ")";
    return mdp;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& head) {
    std::map<std::string, std::string> kv;
    if (text.empty()) return kv;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument(head + " spec: expected key=value, got \"" + item + "\"");
        }
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

class KvReader {
public:
    KvReader(std::map<std::string, std::string> kv, std::string head)
        : kv_(std::move(kv)), head_(std::move(head)) {}

    int require_int(const std::string& key) { return parse_int(key, take(key)); }
    double require_double(const std::string& key) { return parse_double(key, take(key)); }
    int int_or(const std::string& key, int fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        const std::string v = it->second;
        kv_.erase(it);
        return parse_int(key, v);
    }
    double double_or(const std::string& key, double fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        const std::string v = it->second;
        kv_.erase(it);
        return parse_double(key, v);
    }
    std::vector<int> int_list_or(const std::string& key, std::vector<int> fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::vector<int> out;
        std::istringstream in(it->second);
        kv_.erase(it);
        std::string item;
        while (std::getline(in, item, ';')) out.push_back(parse_int(key, item));
        return out;
    }
    void finish() const {
        if (kv_.empty()) return;
        throw std::invalid_argument(head_ + " spec: unknown key \"" + kv_.begin()->first + "\"");
    }

private:
    std::string take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            throw std::invalid_argument(head_ + " spec: missing required key \"" + key + "\"");
        }
        std::string v = it->second;
        kv_.erase(it);
        return v;
    }
    int parse_int(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            const int out = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return out;
        } catch (const std::exception&) {
            throw std::invalid_argument(head_ + " spec: key \"" + key + "\" is not an integer: \"" + v + "\"");
        }
    }
    double parse_double(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return out;
        } catch (const std::exception&) {
            throw std::invalid_argument(head_ + " spec: key \"" + key + "\" is not a number: \"" + v + "\"");
        }
    }

    std::map<std::string, std::string> kv_;
    std::string head_;
};

} // namespace

MdpSpec resolve_env(const std::string& spec) {
    if (std::filesystem::exists(spec)) return load_mdp(spec);
    const auto colon = spec.find(':');
    const std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "chain") {
        KvReader kv(parse_kv(rest, head), head);
        const int n = kv.require_int("n");
        const double slip = kv.require_double("slip");
        const double discount = kv.double_or("discount", 0.9);
        kv.finish();
        return make_chain(n, slip, discount);
    }
    if (head == "gridworld") {
        KvReader kv(parse_kv(rest, head), head);
        const int w = kv.require_int("w");
        const int h = kv.require_int("h");
        const double slip = kv.require_double("slip");
        const int goal = kv.require_int("goal");
        const std::vector<int> pits = kv.int_list_or("pits", {});
        const int start = kv.int_or("start", 0);
        const double discount = kv.double_or("discount", 0.95);
        kv.finish();
        return make_gridworld(w, h, slip, goal, pits, start, discount);
    }
    if (head == "branch") {
        KvReader kv(parse_kv(rest, head), head);
        const double slip = kv.double_or("slip", 0.1);
        const double discount = kv.double_or("discount", 0.97);
        kv.finish();
        return make_branch_gridworld(slip, discount);
    }
    throw std::invalid_argument("unknown environment \"" + spec +
                                "\": expected a JSON document path or chain:/gridworld:/branch");
}

} // namespace sedmdp
