#pragma once
#include <optional>
#include <string>
#include <vector>

#include "pocf/data.hpp"

namespace pocf {

struct Builtin
{
    GameSpec game;
    std::optional<Policy> policy; // the exploration policy paired with the game, if any
};

// D-G1, D-G2 (six agents, k=2), F-G1, F-G2 (three agents, k=3), H-mixed(n).
Builtin builtin_game(const std::string& name);
bool is_builtin_name(const std::string& name);
std::vector<std::string> builtin_names();

// Uniform over joint actions with |C_1| in {2, 4, 5}.
Policy d_policy(const GameSpec& g);
// Uniform over the ten listed joint actions of the three-agent games.
Policy f_policy(const GameSpec& g);

} // namespace pocf
