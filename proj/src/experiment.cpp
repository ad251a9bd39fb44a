#include "pocf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pocf/bandit.hpp"
#include "pocf/builtins.hpp"
#include "pocf/io.hpp"
#include "pocf/models.hpp"
#include "pocf/oracle.hpp"
#include "pocf/semi_bandit.hpp"

namespace pocf {

namespace {

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const char* a, const char* b)
{
    const nlohmann::json* v = nullptr;
    if (j.contains(a)) v = &j.at(a);
    else if (j.contains(b)) v = &j.at(b);
    if (!v) return {};
    if (v->is_array()) return v->get<std::vector<T>>();
    return {v->get<T>()};
}

SolverConfig solver_from_json(const nlohmann::json& j)
{
    SolverConfig c;
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "mixed") c.mode = SolverMode::mixed;
        else if (m == "pure") c.mode = SolverMode::pure;
        else throw Error("solver mode must be mixed or pure, got '" + m + "'");
    }
    c.mc_samples = j.value("mc_samples", j.value("mc", c.mc_samples));
    c.stop_threshold = j.value("stop_threshold", j.value("stop", c.stop_threshold));
    c.max_rounds = j.value("max_rounds", c.max_rounds);
    if (j.contains("eta")) c.fixed_eta = j.at("eta").get<double>();
    c.random_order = j.value("random_order", false);
    c.jacobi = j.value("jacobi", false);
    c.budget = j.value("budget", c.budget);
    c.restarts = j.value("restarts", c.restarts);
    return c;
}

bool is_generator_kind(const std::string& s)
{
    try {
        parse_generator(s);
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int worker_count()
{
#ifdef _OPENMP
    int t = omp_get_max_threads();
#else
    int t = 1;
#endif
    if (const char* env = std::getenv("POCF_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) t = std::min(t, cap);
    }
    return std::max(1, t);
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    if (j.contains("game")) c.generator = j.at("game").get<std::string>();
    if (j.contains("generator")) c.generator = j.at("generator").get<std::string>();
    c.params = j.value("params", nlohmann::json::object());
    c.n_grid = scalar_or_list<int>(j, "n_grid", "n");
    c.k_grid = scalar_or_list<int>(j, "k_grid", "k");
    c.M_grid = scalar_or_list<std::int64_t>(j, "M_grid", "M");
    c.seeds = scalar_or_list<std::uint64_t>(j, "seeds", "seed");
    c.policy = j.value("policy", c.policy);
    if (j.contains("feedback")) c.feedback = parse_feedback(j.at("feedback").get<std::string>());
    c.delta = j.value("delta", c.delta);
    if (j.contains("solver")) c.solver = solver_from_json(j.at("solver"));
    c.exact_gap = j.value("exact_gap", c.exact_gap);
    c.check_assumption = j.value("check_assumption", c.check_assumption);
    c.output = j.value("output", std::string());
    if (c.generator == "mixed_effects" && c.k_grid.empty()) c.k_grid = {5};
    c.validate();
    return c;
}

void ExperimentConfig::validate() const
{
    if (n_grid.empty() || M_grid.empty() || seeds.empty()) throw Error("n_grid, M_grid and seeds must be nonempty");
    const bool builtin = is_builtin_name(generator);
    if (!builtin && !is_generator_kind(generator)) throw Error("unknown generator or builtin '" + generator + "'");
    if (!builtin && k_grid.empty()) throw Error("k_grid must be nonempty");
    if (generator == "mixed_effects")
        for (int k : k_grid)
            if (k != 5) throw Error("mixed_effects forces k = 5");
    for (int n : n_grid)
        if (n < 1) throw Error("n must be at least 1");
    for (auto M : M_grid)
        if (M < 0) throw Error("M must be nonnegative");
    if (!(delta > 0.0 && delta <= 1.0)) throw Error("delta must lie in (0, 1]");
    solver.validate();
}

std::uint64_t experiment_game_seed(std::uint64_t seed, int n, int k)
{
    return derive_seed(seed, 0x9a3e5eed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
}

ResultRow run_task(const ExperimentConfig& cfg, int n, int k, std::int64_t M, std::uint64_t seed)
{
    ResultRow row;
    row.generator = cfg.generator;
    row.policy = cfg.policy;
    row.feedback = to_string(cfg.feedback);
    row.n = n;
    row.k = k;
    row.M = M;
    row.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const std::uint64_t gseed = experiment_game_seed(seed, n, k);
        std::optional<LoadedGame> lg;
        if (is_builtin_name(cfg.generator)) {
            lg.emplace(load_game(cfg.generator));
        } else {
            lg.emplace(LoadedGame{make_generated_game(parse_generator(cfg.generator), n, k, gseed, cfg.params),
                                  std::nullopt});
        }
        const GameSpec& g = lg->game;
        const Policy rho = load_policy(*lg, cfg.policy);
        const std::uint64_t dseed = derive_seed(seed, 0xda7a5e7, static_cast<std::uint64_t>(n) << 32 | k, M);
        const Dataset ds = sample_dataset(g, rho, M, cfg.feedback, dseed);
        SolverConfig sc = cfg.solver;
        sc.seed = derive_seed(seed, 0x501fe, static_cast<std::uint64_t>(n) << 32 | k, M);

        std::optional<JointAction> ns0;
        const bool enumerable = g.enumerable();
        if (cfg.check_assumption && enumerable) {
            const auto ns = enumerate_pure_ns(g);
            if (!ns.empty()) ns0 = ns.front();
        }
        GapReport rep;
        if (cfg.feedback == Feedback::semi) {
            const auto est = SemiBanditEstimator::fit(ds, cfg.delta);
            rep = solve(est, g, sc);
            if (ns0) row.assumption_ok = check_assumption1(g, rho, MixedProfile::point(g, *ns0)).ok;
        } else {
            const auto est = RidgeEstimator::fit(ds, cfg.delta);
            rep = solve(est, g, sc);
            if (ns0) {
                const double c_act = 1.0 / (2.0 * n * std::pow(static_cast<double>(k), 4));
                row.assumption_ok =
                    check_assumption2(est, g, MixedProfile::point(g, *ns0), c_act, static_cast<double>(M)).ok;
            }
        }
        row.surrogate_gap = rep.surrogate_gap;
        row.rounds = rep.rounds;
        row.profile = rep.profile;
        if (cfg.exact_gap && enumerable && n <= 6) {
            attach_exact_gap(rep, g);
            row.exact_gap = rep.exact_gap;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    struct Task
    {
        int n;
        int k;
        std::int64_t M;
        std::uint64_t seed;
    };
    std::vector<int> ks = cfg.k_grid;
    if (ks.empty()) ks = {builtin_game(cfg.generator).game.k()};
    std::vector<int> ns = cfg.n_grid;
    if (is_builtin_name(cfg.generator)) ns = {builtin_game(cfg.generator).game.n()};
    std::vector<Task> tasks;
    for (int n : ns)
        for (int k : ks)
            for (auto M : cfg.M_grid)
                for (auto s : cfg.seeds) tasks.push_back({n, k, M, s});
    std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
        return std::tie(a.n, a.k, a.M, a.seed) < std::tie(b.n, b.k, b.M, b.seed);
    });
    std::vector<ResultRow> rows(tasks.size());
    const int workers = worker_count();
    // Each task writes its own slot, so row order never depends on scheduling.
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(tasks.size()); ++t)
        rows[t] = run_task(cfg, tasks[t].n, tasks[t].k, tasks[t].M, tasks[t].seed);
    return rows;
}

const char* const kCsvHeader =
    "generator,policy,feedback,n,k,M,seed,surrogate_gap,exact_gap,rounds,assumption_ok,wall_time_ms,error";

std::string rows_to_csv(const std::vector<ResultRow>& rows)
{
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        char wt[32];
        std::snprintf(wt, sizeof wt, "%.3f", r.wall_time_ms);
        os << csv_field(r.generator) << ',' << csv_field(r.policy) << ',' << r.feedback << ',' << r.n << ','
           << r.k << ',' << r.M << ',' << r.seed << ',' << (r.error.empty() ? fmt(r.surrogate_gap) : "") << ','
           << (r.exact_gap ? fmt(*r.exact_gap) : "") << ',' << r.rounds << ','
           << (r.assumption_ok ? (*r.assumption_ok ? "true" : "false") : "") << ',' << wt << ','
           << csv_field(r.error) << '\n';
    }
    return os.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t c = 0; c < header.size(); ++c) col[header[c]] = c;
    for (const auto* name : {"generator", "policy", "feedback", "n", "k", "M", "seed", "surrogate_gap", "exact_gap",
                             "rounds", "assumption_ok", "error"})
        if (!col.count(name)) throw Error(std::string("CSV is missing column '") + name + "'");
    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw Error("CSV line " + std::to_string(lineno) + " has the wrong width");
        auto at = [&](const char* c) -> const std::string& { return f[col[c]]; };
        ResultRow r;
        try {
            r.generator = at("generator");
            r.policy = at("policy");
            r.feedback = at("feedback");
            r.n = std::stoi(at("n"));
            r.k = std::stoi(at("k"));
            r.M = std::stoll(at("M"));
            r.seed = std::stoull(at("seed"));
            r.error = at("error");
            if (!at("surrogate_gap").empty()) r.surrogate_gap = std::stod(at("surrogate_gap"));
            if (!at("exact_gap").empty()) r.exact_gap = std::stod(at("exact_gap"));
            r.rounds = std::stoi(at("rounds"));
            if (!at("assumption_ok").empty()) r.assumption_ok = at("assumption_ok") == "true";
            if (col.count("wall_time_ms") && !at("wall_time_ms").empty()) r.wall_time_ms = std::stod(at("wall_time_ms"));
        } catch (const std::logic_error&) {
            throw Error("CSV line " + std::to_string(lineno) + " has a malformed number");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

TrendReport gap_trend_check(const std::vector<ResultRow>& rows, const std::string& generator,
                            const std::string& policy)
{
    std::map<std::pair<int, int>, std::map<std::int64_t, std::pair<double, int>>> grid;
    for (const auto& r : rows) {
        if (!generator.empty() && r.generator != generator) continue;
        if (!policy.empty() && r.policy != policy) continue;
        if (!r.error.empty()) continue;
        auto& cell = grid[{r.n, r.k}][r.M];
        cell.first += r.surrogate_gap;
        cell.second += 1;
    }
    if (grid.empty()) throw Error("no rows match the requested generator and policy");
    TrendReport rep;
    rep.pass = true;
    std::ostringstream os;
    for (const auto& [nk, byM] : grid) {
        if (byM.size() < 2)
            throw Error("trend undefined: grid point n=" + std::to_string(nk.first) + ", k=" +
                        std::to_string(nk.second) + " has a single M");
        TrendCell c;
        c.n = nk.first;
        c.k = nk.second;
        c.M_small = byM.begin()->first;
        c.M_large = byM.rbegin()->first;
        c.mean_small = byM.begin()->second.first / byM.begin()->second.second;
        c.mean_large = byM.rbegin()->second.first / byM.rbegin()->second.second;
        c.decreased = c.mean_large < c.mean_small;
        rep.pass = rep.pass && c.decreased;
        os << "n=" << c.n << " k=" << c.k << ": mean gap " << fmt(c.mean_small) << " at M=" << c.M_small << ", "
           << fmt(c.mean_large) << " at M=" << c.M_large << (c.decreased ? " (decreased)" : " (no decrease)")
           << '\n';
        rep.cells.push_back(c);
    }
    const bool one_rand = policy == "one_rand" || policy == "coalition_size";
    rep.expected_fail = one_rand && !rep.pass;
    if (rep.pass) os << "pass: gap decreases with M";
    else if (rep.expected_fail) os << "expected-fail: no decrease, consistent with missing coalition-size coverage";
    else os << "fail: gap does not decrease with M";
    rep.summary = os.str();
    return rep;
}

} // namespace pocf
