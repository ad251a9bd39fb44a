#pragma once
#include <optional>
#include <string>
#include <vector>

#include "pocf/estimator.hpp"

namespace pocf {

enum class SolverMode { mixed, pure };

struct SolverConfig
{
    SolverMode mode = SolverMode::mixed;
    int mc_samples = 100;
    double stop_threshold = 1e-3;
    int max_rounds = 500;
    std::optional<double> fixed_eta; // empty: eta_t = 2/(t+2)
    bool random_order = false;       // shuffle the agent sweep each round
    bool jacobi = false;             // best responses against the previous round's profile
    std::uint64_t budget = kEnumBudget;
    std::uint64_t seed = 0;
    int restarts = 8; // pure mode, local-search regime

    void validate() const;
};

struct AgentTerm
{
    int agent = -1;
    Mask best_action = 0;  // optimistic best response
    double ucb_value = 0.0; // max over a_i' of E[UCB_i(a_i', phi_-i)]
    double lcb_value = 0.0; // E_phi[LCB_i]
};

struct GapReport
{
    MixedProfile profile;
    double surrogate_gap = 0.0;
    std::vector<AgentTerm> per_agent;
    std::optional<double> exact_gap;
    std::optional<double> bound;
    int rounds = 0;
    bool exact = true;       // expectations enumerated rather than sampled
    bool hit_max_rounds = false;
    std::string regime = "evaluate"; // mixed | exhaustive | local_search | evaluate
    double std_err = 0.0;   // Monte Carlo error of surrogate_gap
    double eps_opt = 0.0;   // surrogate gap of the output minus the best seen
    std::vector<double> trace; // best-seen surrogate gap after each round
};

struct BestResponse
{
    int action = 0; // index into the agent's action set
    double value = 0.0;
    double std_err = 0.0;
};

// Exact when the others' support product fits the budget, Monte Carlo otherwise.
EvalMode solver_eval_mode(const GameSpec& g, const MixedProfile& phi, const SolverConfig& cfg, std::uint64_t stream);

BestResponse optimistic_best_response(const Estimator& est, const GameSpec& g, const MixedProfile& phi, int i,
                                      const SolverConfig& cfg, std::uint64_t stream = 0);

GapReport surrogate_gap(const Estimator& est, const GameSpec& g, const MixedProfile& phi, const SolverConfig& cfg,
                        std::uint64_t stream = 0);

// Pure-profile surrogate objective: max_i [max_a' UCB_i(a', a_-i) - LCB_i(a)].
double pure_surrogate(const Estimator& est, const GameSpec& g, const JointAction& a);

GapReport solve_mixed(const Estimator& est, const GameSpec& g, const SolverConfig& cfg);
GapReport solve_pure(const Estimator& est, const GameSpec& g, const SolverConfig& cfg);
GapReport solve(const Estimator& est, const GameSpec& g, const SolverConfig& cfg);

// Fills exact_gap when the game is enumerable.
void attach_exact_gap(GapReport& r, const GameSpec& g);

} // namespace pocf
