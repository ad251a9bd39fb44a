#pragma once
#include <optional>
#include <string>

#include "json.hpp"

#include "pocf/data.hpp"
#include "pocf/solver.hpp"

namespace pocf {

// 1-based coalition lists.
nlohmann::json mask_to_json(Mask m);
Mask mask_from_json(const nlohmann::json& j, int k);
nlohmann::json joint_to_json(const JointAction& a);
JointAction joint_from_json(const nlohmann::json& j, int k);
nlohmann::json profile_to_json(const GameSpec& g, const MixedProfile& phi);

// Builtins serialize as {"builtin": name}; other games as {n, k, action_sets, ...model}.
nlohmann::json game_to_json(const GameSpec& g);
GameSpec game_from_json(const nlohmann::json& j);

struct LoadedGame
{
    GameSpec game;
    std::optional<Policy> policy; // paired policy of a builtin
};

// Accepts a builtin name or a path to a game file.
LoadedGame load_game(const std::string& arg);

// rand | uniform_random | one_rand | coalition_size | builtin | path to {"support": [{"a", "p"}, ...]}.
Policy load_policy(const LoadedGame& lg, const std::string& arg);
Policy policy_from_json(const GameSpec& g, const nlohmann::json& j, const std::string& descriptor);

nlohmann::json report_to_json(const GameSpec& g, const GapReport& r);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Reads the TOML subset used by experiment configs: tables, dotted keys, strings,
// numbers, booleans and (nested) arrays.
nlohmann::json parse_toml(const std::string& text);
// JSON unless the path ends in .toml.
nlohmann::json read_config(const std::string& path);

} // namespace pocf
