#include "doctest.h"

#include <set>

#include "pocf/experiment.hpp"
#include "pocf/io.hpp"

using namespace pocf;

namespace {

ExperimentConfig small_grid()
{
    return ExperimentConfig::from_json(nlohmann::json::parse(R"({
        "generator": "size_uniform", "n_grid": [2, 3], "k_grid": [2], "M_grid": [50, 200, 800],
        "seeds": [0, 1, 2, 3, 4], "policy": "rand", "feedback": "semi", "delta": 0.05,
        "solver": {"max_rounds": 30}})"));
}

std::string without_wall_time(std::vector<ResultRow> rows)
{
    for (auto& r : rows) r.wall_time_ms = 0.0;
    return rows_to_csv(rows);
}

ResultRow row(int n, std::int64_t M, std::uint64_t seed, double gap, std::string policy = "rand")
{
    ResultRow r;
    r.generator = "size_uniform";
    r.policy = std::move(policy);
    r.feedback = "semi";
    r.n = n;
    r.k = 2;
    r.M = M;
    r.seed = seed;
    r.surrogate_gap = gap;
    return r;
}

} // namespace

TEST_CASE("grid produces one row per point and seed")
{
    auto rows = run_experiment(small_grid());
    CHECK(rows.size() == 2 * 3 * 5);
    std::set<std::tuple<int, std::int64_t, std::uint64_t>> keys;
    for (const auto& r : rows) {
        keys.insert({r.n, r.M, r.seed});
        CHECK(r.error.empty());
        CHECK(r.surrogate_gap >= 0.0);
        REQUIRE(r.exact_gap);
        CHECK(*r.exact_gap >= 0.0);
        CHECK(r.assumption_ok);
    }
    CHECK(keys.size() == 30);
    CHECK(std::is_sorted(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.n, a.k, a.M, a.seed) < std::tie(b.n, b.k, b.M, b.seed);
    }));
}

TEST_CASE("reruns are identical apart from wall time")
{
    auto cfg = small_grid();
    CHECK(without_wall_time(run_experiment(cfg)) == without_wall_time(run_experiment(cfg)));
    CHECK(rows_to_csv({}).rfind(kCsvHeader, 0) == 0);
}

TEST_CASE("CSV round trip")
{
    auto rows = run_experiment(small_grid());
    rows[3].error = "budget, \"exceeded\"";
    rows[4].exact_gap.reset();
    rows[4].assumption_ok.reset();
    const auto text = rows_to_csv(rows);
    CHECK(rows_to_csv(rows_from_csv(text)) == text);
    auto back = rows_from_csv(text);
    CHECK(back[3].error == rows[3].error);
    CHECK_FALSE(back[4].exact_gap);
    CHECK(back[7].surrogate_gap == rows[7].surrogate_gap);
}

TEST_CASE("per-row errors do not stop the run")
{
    auto cfg = small_grid();
    cfg.n_grid = {3};
    cfg.seeds = {0};
    cfg.M_grid = {40, 80};
    cfg.policy = "builtin"; // generated games carry no builtin policy
    auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK_FALSE(r.error.empty());
        CHECK_FALSE(r.exact_gap);
    }
}

TEST_CASE("trend check")
{
    std::vector<ResultRow> rows;
    for (std::uint64_t s = 0; s < 3; ++s) {
        rows.push_back(row(3, 100, s, 2.0 + s));
        rows.push_back(row(3, 1000, s, 1.0 + s));
    }
    auto rep = gap_trend_check(rows, "size_uniform", "rand");
    CHECK(rep.pass);
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.cells[0].mean_small == doctest::Approx(3.0));
    CHECK(rep.cells[0].mean_large == doctest::Approx(2.0));

    std::vector<ResultRow> flat;
    for (std::uint64_t s = 0; s < 3; ++s) {
        flat.push_back(row(3, 100, s, 1.0, "one_rand"));
        flat.push_back(row(3, 1000, s, 1.0, "one_rand"));
    }
    auto neg = gap_trend_check(flat, "", "one_rand");
    CHECK_FALSE(neg.pass);
    CHECK(neg.expected_fail);
    CHECK(neg.summary.find("expected-fail") != std::string::npos);

    std::vector<ResultRow> single{row(3, 100, 0, 1.0), row(3, 100, 1, 2.0)};
    CHECK_THROWS_AS(gap_trend_check(single, "", ""), Error);
    CHECK_THROWS_AS(gap_trend_check(rows, "gaussian", ""), Error);
}

TEST_CASE("config validation")
{
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"n_grid": [], "k_grid": [2], "M_grid": [10], "seeds": [0]})")),
                    Error);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(
                        R"({"generator": "poisson", "n_grid": [2], "k_grid": [2], "M_grid": [10], "seeds": [0]})")),
                    Error);
    auto me = ExperimentConfig::from_json(
        nlohmann::json::parse(R"({"generator": "mixed_effects", "n_grid": [3], "M_grid": [10], "seeds": [0]})"));
    CHECK(me.k_grid == std::vector<int>{5});
    auto toml = ExperimentConfig::from_json(parse_toml("generator = \"uniform\"\nn = 3\nk = 2\nM_grid = [10, 20]\nseeds = [1]\n"));
    CHECK(toml.n_grid == std::vector<int>{3});
    CHECK(toml.M_grid.size() == 2);
}

TEST_CASE("game seed ignores M")
{
    CHECK(experiment_game_seed(4, 3, 2) == experiment_game_seed(4, 3, 2));
    CHECK(experiment_game_seed(4, 3, 2) != experiment_game_seed(5, 3, 2));
    CHECK(experiment_game_seed(4, 3, 2) != experiment_game_seed(4, 4, 2));
}
