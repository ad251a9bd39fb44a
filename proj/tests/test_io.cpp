#include "doctest.h"

#include <filesystem>

#include "pocf/builtins.hpp"
#include "pocf/io.hpp"
#include "test_util.hpp"

using namespace pocf;
using namespace testutil;
using nlohmann::json;

TEST_CASE("toml subset")
{
    const std::string text = R"(# experiment
generator = "size_uniform"
policy = 'one_rand'
n_grid = [3, 4]
M_grid = [
  100,   # small
  2_000,
]
delta = 0.05
exact_gap = true

[solver]
mode = "mixed"
stop_threshold = 1e-3
max_rounds = 200

[params]
action_set_size = 4
nested.deep = [[1, 2], [3]]
)";
    auto j = parse_toml(text);
    CHECK(j["generator"] == "size_uniform");
    CHECK(j["policy"] == "one_rand");
    CHECK(j["n_grid"] == json::array({3, 4}));
    CHECK(j["M_grid"] == json::array({100, 2000}));
    CHECK(j["delta"].get<double>() == 0.05);
    CHECK(j["exact_gap"] == true);
    CHECK(j["solver"]["mode"] == "mixed");
    CHECK(j["solver"]["stop_threshold"].get<double>() == 1e-3);
    CHECK(j["solver"]["max_rounds"].is_number_integer());
    CHECK(j["params"]["action_set_size"] == 4);
    CHECK(j["params"]["nested"]["deep"] == json::parse("[[1,2],[3]]"));
}

TEST_CASE("toml errors name the line")
{
    auto line_of = [](const std::string& text) {
        try {
            parse_toml(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(line_of("a = 1\nb = \n").find("line 2") != std::string::npos);
    CHECK(line_of("a = 1\na = 2\n").find("duplicate") != std::string::npos);
    CHECK(line_of("x = [1, 2\n").find("TOML line") != std::string::npos);
    CHECK(line_of("s = \"open\n").find("line 1") != std::string::npos);
    CHECK(line_of("v = 1 2\n").find("line 1") != std::string::npos);
}

TEST_CASE("joint actions serialize 1-based")
{
    JointAction a{{C1, C1 | C3, C2}};
    auto j = joint_to_json(a);
    CHECK(j == json::parse("[[1],[1,3],[2]]"));
    CHECK(joint_from_json(j, 3) == a);
    CHECK_THROWS_AS(mask_from_json(json::parse("[4]"), 3), Error);
    CHECK_THROWS_AS(mask_from_json(json::parse("[]"), 3), Error);
}

TEST_CASE("game files round-trip")
{
    SUBCASE("generated")
    {
        auto g = make_generated_game(GeneratorKind::size_gaussian, 4, 3, 61, {{"action_set_size", 4}});
        auto back = game_from_json(json::parse(game_to_json(g).dump()));
        CHECK(game_hash(back) == game_hash(g));
        CHECK(back.action_sets() == g.action_sets());
        CHECK(back.mean(1, 2, 0, 3) == g.mean(1, 2, 0, 3));
    }
    SUBCASE("explicit")
    {
        auto g = random_explicit_game(3, 2, 5, {C1, C2, C1 | C2});
        auto back = game_from_json(json::parse(game_to_json(g).dump()));
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(back.mean(i, j, l, 2) == g.mean(i, j, l, 2));
    }
    SUBCASE("builtin")
    {
        auto g = builtin_game("F-G2").game;
        CHECK(game_to_json(g) == json{{"builtin", "F-G2"}});
        CHECK(game_hash(game_from_json(game_to_json(g))) == game_hash(g));
    }
}

TEST_CASE("game files are validated")
{
    CHECK_THROWS_AS(game_from_json(json::parse(R"({"n":2,"k":1})")), Error);
    // Asymmetric means are refused.
    CHECK_THROWS_AS(game_from_json(json::parse(
                        R"({"n":2,"k":1,"action_sets":[[[1]],[[1]]],"mean_table":[[[0,0.5],[0.2,0]]]})")),
                    Error);
    CHECK_THROWS_AS(game_from_json(json::parse(
                        R"({"n":2,"k":1,"action_sets":[[[1]],[[1]]],"mean_table":[[[0,1.5],[1.5,0]]]})")),
                    Error);
    CHECK_THROWS_AS(load_game("no-such-game"), Error);
}

TEST_CASE("policies load by name or file")
{
    auto lg = load_game("D-G1");
    CHECK(load_policy(lg, "builtin").support().size() == 36);
    CHECK(load_policy(lg, "rand").is_product());
    CHECK(load_policy(lg, "coalition_size").descriptor() == load_policy(lg, "one_rand").descriptor());
    CHECK_THROWS_AS(load_policy(load_game("H-mixed(3)"), "builtin"), Error);

    const auto path = (std::filesystem::temp_directory_path() / "pocf_policy.json").string();
    write_text_file(path, R"({"support":[{"a":[[1],[1],[2],[2],[2],[2]],"p":0.25},
                                         {"a":[[2],[2],[2],[2],[2],[2]],"p":0.75}]})");
    auto rho = load_policy(lg, path);
    CHECK(rho.support().size() == 2);
    CHECK(rho.probability(lg.game, d_profile({0, 1})) == 0.25);
}

TEST_CASE("config files pick their parser by extension")
{
    const auto dir = std::filesystem::temp_directory_path();
    write_text_file((dir / "pocf_cfg.toml").string(), "n_grid = [2]\n");
    write_text_file((dir / "pocf_cfg.json").string(), R"({"n_grid": [2]})");
    CHECK(read_config((dir / "pocf_cfg.toml").string()) == read_config((dir / "pocf_cfg.json").string()));
}
