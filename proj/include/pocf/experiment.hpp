#pragma once
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pocf/data.hpp"
#include "pocf/solver.hpp"

namespace pocf {

struct ExperimentConfig
{
    std::string generator = "uniform"; // generator kind or a builtin game name
    nlohmann::json params = nlohmann::json::object();
    std::vector<int> n_grid;
    std::vector<int> k_grid;
    std::vector<std::int64_t> M_grid;
    std::string policy = "rand";
    Feedback feedback = Feedback::semi;
    double delta = 0.01;
    std::vector<std::uint64_t> seeds;
    SolverConfig solver;
    bool exact_gap = true;
    bool check_assumption = true;
    std::string output;

    static ExperimentConfig from_json(const nlohmann::json& j);
    void validate() const;
};

struct ResultRow
{
    std::string generator;
    std::string policy;
    std::string feedback;
    int n = 0;
    int k = 0;
    std::int64_t M = 0;
    std::uint64_t seed = 0;
    double surrogate_gap = 0.0;
    std::optional<double> exact_gap;
    int rounds = 0;
    std::optional<bool> assumption_ok;
    double wall_time_ms = 0.0;
    std::string error;
    std::optional<MixedProfile> profile; // solver output; not written to CSV
};

// Game seed for a grid point; independent of M so every M sees the same game.
std::uint64_t experiment_game_seed(std::uint64_t seed, int n, int k);

// One (n, k, M, seed) task.
ResultRow run_task(const ExperimentConfig& cfg, int n, int k, std::int64_t M, std::uint64_t seed);

// Rows sorted by (n, k, M, seed). POCF_THREADS caps the worker count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

extern const char* const kCsvHeader;
std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);

struct TrendCell
{
    int n = 0;
    int k = 0;
    std::int64_t M_small = 0;
    std::int64_t M_large = 0;
    double mean_small = 0.0;
    double mean_large = 0.0;
    bool decreased = false;
};

struct TrendReport
{
    std::vector<TrendCell> cells;
    bool pass = false;          // every cell decreased
    bool expected_fail = false; // policy is one_rand and some cell failed to decrease
    std::string summary;
};

// Filters rows by generator and policy (empty matches all). Refuses grids with one M.
TrendReport gap_trend_check(const std::vector<ResultRow>& rows, const std::string& generator,
                            const std::string& policy);

} // namespace pocf
