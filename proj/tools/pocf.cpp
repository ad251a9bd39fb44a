// Command-line front end: oracles, dataset generation, fitting, solving and experiments.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "pocf/bandit.hpp"
#include "pocf/builtins.hpp"
#include "pocf/experiment.hpp"
#include "pocf/io.hpp"
#include "pocf/oracle.hpp"
#include "pocf/semi_bandit.hpp"
#include "pocf/solver.hpp"

using namespace pocf;
using nlohmann::json;

namespace {

void emit(const json& j, const std::string& out)
{
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") std::cout << text;
    else write_text_file(out, text);
}

json ns_list(const std::vector<JointAction>& ns)
{
    json arr = json::array();
    for (const auto& a : ns) arr.push_back(joint_to_json(a));
    return arr;
}

json cert_to_json(const CertReport& r)
{
    json clauses = json::array();
    for (const auto& c : r.clauses)
        clauses.push_back({{"clause", c.description}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"builtin", r.name}, {"pass", r.pass}, {"ns_count", r.ns.size()}, {"ns", ns_list(r.ns)},
            {"clauses", clauses}};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pocf: Nash-stable coalition structures from offline data"};
    app.require_subcommand(1);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Brute-force ground truth");
    oracle->require_subcommand(1);
    std::string game_arg, out_arg, start_arg, builtin_arg;
    std::uint64_t seed = 0;

    auto* enumerate = oracle->add_subcommand("enumerate", "List every pure Nash-stable joint action");
    enumerate->add_option("--game", game_arg, "Builtin name or game file")->required();
    enumerate->add_option("--out", out_arg, "Output JSON (stdout when omitted)");

    auto* dynamics = oracle->add_subcommand("dynamics", "Run better-response dynamics");
    dynamics->add_option("--game", game_arg, "Builtin name or game file")->required();
    dynamics->add_option("--seed", seed, "Random seed");
    dynamics->add_option("--start", start_arg, "Start profile as JSON, e.g. [[1],[1,2]]; random when omitted");
    dynamics->add_option("--out", out_arg, "Output JSON");

    auto* certify = oracle->add_subcommand("certify", "Check a builtin game's Nash-stable set");
    certify->add_option("--builtin", builtin_arg, "D-G1, D-G2, F-G1, F-G2 or H-mixed(n)")->required();
    certify->add_option("--out", out_arg, "Output JSON");

    // generate
    auto* generate = app.add_subcommand("generate", "Sample an offline dataset");
    std::string policy_arg = "rand", feedback_arg = "semi";
    std::int64_t M = 0;
    generate->add_option("--game", game_arg, "Builtin name or game file")->required();
    generate->add_option("--policy", policy_arg, "rand, one_rand, coalition_size, builtin or a policy file");
    generate->add_option("--M", M, "Number of records")->required()->check(CLI::NonNegativeNumber);
    generate->add_option("--feedback", feedback_arg, "semi or bandit")->check(CLI::IsMember({"semi", "bandit"}));
    generate->add_option("--seed", seed, "Random seed");
    generate->add_option("--out", out_arg, "Output JSONL")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit an estimator to a dataset");
    std::string dataset_arg;
    double delta = 0.05;
    bool reduce_semi = false;
    fit->add_option("--dataset", dataset_arg, "Dataset JSONL")->required();
    fit->add_option("--feedback", feedback_arg, "semi or bandit")->check(CLI::IsMember({"semi", "bandit"}));
    fit->add_option("--delta", delta, "Confidence level")->check(CLI::Range(1e-300, 1.0));
    fit->add_flag("--reduce-semi", reduce_semi, "Fit the ridge model to totals rebuilt from semi-bandit data");
    fit->add_option("--out", out_arg, "Estimator JSON")->required();

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Minimize the surrogate gap");
    std::string est_arg, mode_arg = "mixed";
    SolverConfig sc;
    double eta = 0.0;
    bool exact_gap = false;
    solve_cmd->add_option("--est", est_arg, "Estimator JSON")->required();
    solve_cmd->add_option("--game", game_arg, "Builtin name or game file")->required();
    solve_cmd->add_option("--mode", mode_arg, "mixed or pure")->check(CLI::IsMember({"mixed", "pure"}));
    solve_cmd->add_option("--mc", sc.mc_samples, "Monte Carlo samples per expectation");
    solve_cmd->add_option("--stop", sc.stop_threshold, "Stop when the gap changes by less than this");
    solve_cmd->add_option("--max-rounds", sc.max_rounds, "Round limit");
    solve_cmd->add_option("--eta", eta, "Fixed mixing weight (default 2/(t+2))");
    solve_cmd->add_flag("--jacobi", sc.jacobi, "Best responses against the previous round's profile");
    solve_cmd->add_option("--seed", seed, "Random seed");
    solve_cmd->add_option("--policy", policy_arg, "Exploration policy, used for the theoretical bound");
    solve_cmd->add_flag("--exact-gap", exact_gap, "Also report the true duality gap (enumerable games)");
    solve_cmd->add_option("--out", out_arg, "Report JSON");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run a configured grid and write CSV");
    std::string config_arg;
    experiment->add_option("--config", config_arg, "TOML or JSON config")->required();
    experiment->add_option("--out", out_arg, "Output CSV (overrides the config)");

    // trend
    auto* trend = app.add_subcommand("trend", "Check that the mean gap falls from the smallest to the largest M");
    std::string csv_arg, generator_filter, policy_filter;
    trend->add_option("--csv", csv_arg, "Experiment CSV")->required();
    trend->add_option("--generator", generator_filter, "Only rows with this generator");
    trend->add_option("--policy", policy_filter, "Only rows with this policy");

    auto* builtins = app.add_subcommand("builtins", "List builtin games");

    CLI11_PARSE(app, argc, argv);

    try {
        if (enumerate->parsed()) {
            const auto lg = load_game(game_arg);
            const auto ns = enumerate_pure_ns(lg.game);
            emit({{"game", game_to_json(lg.game)}, {"count", ns.size()}, {"ns", ns_list(ns)}}, out_arg);
        } else if (dynamics->parsed()) {
            const auto lg = load_game(game_arg);
            const GameSpec& g = lg.game;
            Rng rng(derive_seed(seed, 0xd1a));
            JointAction start;
            if (start_arg.empty()) {
                for (int i = 0; i < g.n(); ++i)
                    start.actions.push_back(g.actions(i)[static_cast<std::size_t>(uniform01(rng) * g.actions(i).size())]);
            } else {
                start = joint_from_json(json::parse(start_arg), g.k());
            }
            const auto r = better_response_dynamics(g, start, rng);
            json j = {{"start", joint_to_json(start)},
                      {"final", joint_to_json(r.profile)},
                      {"steps", r.steps},
                      {"potential", r.potential},
                      {"identity_checked", r.identity_checked}};
            if (g.enumerable()) {
                const auto ns = enumerate_pure_ns(g);
                j["in_ns_set"] = std::binary_search(ns.begin(), ns.end(), r.profile);
                j["exact_gap"] = exact_duality_gap(g, MixedProfile::point(g, r.profile), EvalMode::exact_mode()).gap;
            }
            emit(j, out_arg);
        } else if (certify->parsed()) {
            const auto r = verify_builtin(builtin_arg);
            emit(cert_to_json(r), out_arg);
            return r.pass ? 0 : 1;
        } else if (generate->parsed()) {
            const auto lg = load_game(game_arg);
            const auto rho = load_policy(lg, policy_arg);
            const auto ds = sample_dataset(lg.game, rho, M, parse_feedback(feedback_arg), seed);
            write_dataset(ds, out_arg);
        } else if (fit->parsed()) {
            const auto ds = read_dataset(dataset_arg);
            const auto want = parse_feedback(feedback_arg);
            json j;
            if (want == Feedback::semi) {
                j = SemiBanditEstimator::fit(ds, delta).to_json();
            } else {
                j = RidgeEstimator::fit(ds, delta, reduce_semi).to_json();
            }
            j["dataset_meta"] = ds.meta;
            emit(j, out_arg);
        } else if (solve_cmd->parsed()) {
            const auto lg = load_game(game_arg);
            const GameSpec& g = lg.game;
            const json ej = read_json_file(est_arg);
            sc.mode = mode_arg == "pure" ? SolverMode::pure : SolverMode::mixed;
            if (eta > 0.0) sc.fixed_eta = eta;
            sc.seed = seed;
            const std::string kind = ej.at("kind").get<std::string>();
            GapReport rep;
            json extra = json::object();
            std::optional<JointAction> ns0;
            if (g.enumerable()) {
                const auto ns = enumerate_pure_ns(g);
                if (!ns.empty()) ns0 = ns.front();
            }
            if (kind == "semi") {
                const auto est = SemiBanditEstimator::from_json(ej);
                rep = solve(est, g, sc);
                if (solve_cmd->count("--policy") && ns0) {
                    const auto rho = load_policy(lg, policy_arg);
                    const double c = coalition_size_coefficient(g, rho, MixedProfile::point(g, *ns0));
                    const double M_est = ej.contains("dataset_meta") ? ej["dataset_meta"].value("M", 0.0) : 0.0;
                    const auto var = sc.mode == SolverMode::mixed ? Variant::mixed : Variant::pure;
                    extra["c_size"] = std::isfinite(c) ? json(c) : json("inf");
                    if (std::isfinite(c))
                        rep.bound = theoretical_bound_semibandit(g.n(), g.k(), c, est.delta(), M_est, rep.eps_opt, var);
                }
            } else {
                const auto est = RidgeEstimator::from_json(ej);
                rep = solve(est, g, sc);
                extra["misspecified"] = g.size_dependent();
                if (ns0) {
                    const double M_est = static_cast<double>(est.records());
                    const double c = max_action_coverage(est, g, MixedProfile::point(g, *ns0), M_est);
                    extra["c_act"] = c;
                    if (c > 0.0) rep.bound = theoretical_bound_bandit(g.n(), g.k(), est.beta(), c, M_est, rep.eps_opt);
                }
            }
            if (exact_gap) attach_exact_gap(rep, g);
            json j = report_to_json(g, rep);
            j.update(extra);
            emit(j, out_arg);
        } else if (experiment->parsed()) {
            auto cfg = ExperimentConfig::from_json(read_config(config_arg));
            if (!out_arg.empty()) cfg.output = out_arg;
            if (cfg.output.empty()) throw Error("no output path: pass --out or set output in the config");
            const auto rows = run_experiment(cfg);
            write_text_file(cfg.output, rows_to_csv(rows));
            std::size_t failed = 0;
            for (const auto& r : rows) failed += !r.error.empty();
            std::fprintf(stderr, "%zu rows written to %s (%zu with errors)\n", rows.size(), cfg.output.c_str(), failed);
        } else if (trend->parsed()) {
            std::ifstream in(csv_arg);
            if (!in) throw Error("cannot open " + csv_arg);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto rep = gap_trend_check(rows_from_csv(ss.str()), generator_filter, policy_filter);
            json cells = json::array();
            for (const auto& c : rep.cells)
                cells.push_back({{"n", c.n}, {"k", c.k}, {"M_small", c.M_small}, {"M_large", c.M_large},
                                 {"mean_small", c.mean_small}, {"mean_large", c.mean_large},
                                 {"decreased", c.decreased}});
            emit({{"pass", rep.pass}, {"expected_fail", rep.expected_fail}, {"cells", cells},
                  {"summary", rep.summary}},
                 "");
            return rep.pass || rep.expected_fail ? 0 : 1;
        } else if (builtins->parsed()) {
            emit(builtin_names(), "");
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
