#pragma once

#include "sedmdp/mdp.hpp"

#include <string>

namespace sedmdp {

// Parses the JSON MDP document format (format_version 1) from a string.
// Parse failures throw std::invalid_argument including the byte offset;
// structural and numeric failures defer to MdpSpec::validate.
MdpSpec parse_mdp_document(const std::string& text, const std::string& fallback_name = "");

// Reads a document from disk; file errors and parse errors both throwingly
// name the path.
MdpSpec load_mdp(const std::string& path);

// Serializes back to the document format (used by the CLI and tests).
std::string mdp_to_document(const MdpSpec& mdp);

// Linear corridor of n >= 2 states. Action 0 steps left, action 1 steps
// right; with probability slip (in [0, 0.5]) the step is reversed. Moves off
// either end stay in place. Entering the last state pays +1 (rewards are
// expectations over the slip), that state is terminal, and starts are at
// state 0.
MdpSpec make_chain(int n, double slip, double discount = 0.9);

// w-by-h grid, state id y*w + x. Actions 0..3 move up, down, left, right;
// with probability slip the move goes to one of the two lateral directions
// (slip/2 each). Moves into a wall stay in place. Entering the goal pays +1,
// entering a pit pays -1, both are terminal.
MdpSpec make_gridworld(int w, int h, double slip, int goal, const std::vector<int>& pits,
                       int start = 0, double discount = 0.95);

// 7x5 gridworld with a corridor that forks next to two pits: the short path
// to the goal hugs the hazard, so stale actions are costly.
MdpSpec make_branch_gridworld(double slip = 0.1, double discount = 0.97);

// Resolves an environment spec string: a path to a JSON document, or a
// builtin form "chain:n=5,slip=0.1", "gridworld:w=7,h=5,slip=0.1,goal=12,
// pits=20;27,start=14", "branch" / "branch:slip=0.05". Key order is free,
// unknown keys throw.
MdpSpec resolve_env(const std::string& spec);

} // namespace sedmdp
