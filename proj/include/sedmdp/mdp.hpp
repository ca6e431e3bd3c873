#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sedmdp {

// Finite MDP with dense tables. Terminal states are absorbing: they
// self-loop under every action with zero reward, which the validator
// enforces so downstream planners and oracles can rely on it.
struct MdpSpec {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transitions;     // [s][a][s'] row-major
    std::vector<double> rewards;         // [s][a]
    std::vector<double> initial;         // distribution over start states
    double discount = 0.0;               // in [0, 1)
    std::vector<std::uint8_t> terminal;  // per-state flag, size n_states
    std::string name;

    double p(int s, int a, int next) const {
        return transitions[(static_cast<std::size_t>(s) * n_actions + a) * n_states + next];
    }
    std::span<const double> row(int s, int a) const {
        return {transitions.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
                static_cast<std::size_t>(n_states)};
    }
    double reward(int s, int a) const {
        return rewards[static_cast<std::size_t>(s) * n_actions + a];
    }
    bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)] != 0; }

    // Throws std::invalid_argument naming the offending table entry
    // (which row violates stochasticity and by how much).
    void validate() const;
};

} // namespace sedmdp
