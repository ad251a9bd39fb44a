#include "pocf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pocf {

void SolverConfig::validate() const
{
    if (mc_samples < 1) throw Error("mc_samples must be at least 1");
    if (!(stop_threshold > 0.0)) throw Error("stop threshold must be positive");
    if (max_rounds < 1) throw Error("max_rounds must be at least 1");
    if (fixed_eta && !(*fixed_eta > 0.0 && *fixed_eta <= 1.0)) throw Error("fixed eta must lie in (0, 1]");
    if (restarts < 1) throw Error("restarts must be at least 1");
}

EvalMode solver_eval_mode(const GameSpec& g, const MixedProfile& phi, const SolverConfig& cfg, std::uint64_t stream)
{
    // Largest product of the other agents' supports over all agents.
    double worst = 1.0;
    for (int i = 0; i < g.n(); ++i) {
        double prod = 1.0;
        for (int j = 0; j < g.n(); ++j) {
            if (j == i) continue;
            prod *= static_cast<double>(
                std::count_if(phi.probs[j].begin(), phi.probs[j].end(), [](double p) { return p > 0.0; }));
        }
        worst = std::max(worst, prod);
    }
    if (worst <= static_cast<double>(cfg.budget)) {
        EvalMode m;
        m.budget = std::numeric_limits<std::uint64_t>::max();
        return m;
    }
    return EvalMode::monte_carlo(cfg.mc_samples, derive_seed(cfg.seed, 0x50176e, stream));
}

BestResponse optimistic_best_response(const Estimator& est, const GameSpec& g, const MixedProfile& phi, int i,
                                      const SolverConfig& cfg, std::uint64_t stream)
{
    AgentPayoff ucb = [&est](const Mask* a, int ag) { return est.ucb(a, ag); };
    const auto mode = solver_eval_mode(g, phi, cfg, stream);
    const auto row = deviation_row(g, phi, i, ucb, mode);
    BestResponse br;
    br.value = row.value[0];
    br.std_err = row.std_err[0];
    for (std::size_t q = 1; q < row.value.size(); ++q)
        if (row.value[q] > br.value + 1e-12) {
            br.action = static_cast<int>(q);
            br.value = row.value[q];
            br.std_err = row.std_err[q];
        }
    return br;
}

GapReport surrogate_gap(const Estimator& est, const GameSpec& g, const MixedProfile& phi, const SolverConfig& cfg,
                        std::uint64_t stream)
{
    phi.validate(g);
    if (est.n() != g.n() || est.k() != g.k()) throw Error("estimator shape does not match the game");
    AgentPayoff lcb = [&est](const Mask* a, int ag) { return est.lcb(a, ag); };
    GapReport r;
    r.profile = phi;
    r.surrogate_gap = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n(); ++i) {
        const std::uint64_t s = stream * 1000003ULL + static_cast<std::uint64_t>(i);
        const auto mode = solver_eval_mode(g, phi, cfg, s);
        r.exact = r.exact && mode.exact;
        const auto br = optimistic_best_response(est, g, phi, i, cfg, s);
        // Same stream as the UCB row, so both use common random numbers.
        const auto row = deviation_row(g, phi, i, lcb, mode);
        double low = 0.0, var = 0.0;
        for (std::size_t q = 0; q < row.value.size(); ++q) {
            low += phi.probs[i][q] * row.value[q];
            var += phi.probs[i][q] * phi.probs[i][q] * row.std_err[q] * row.std_err[q];
        }
        r.per_agent.push_back({i, g.actions(i)[br.action], br.value, low});
        const double term = br.value - low;
        if (term > r.surrogate_gap) {
            r.surrogate_gap = term;
            r.std_err = std::sqrt(var + br.std_err * br.std_err);
        }
    }
    return r;
}

double pure_surrogate(const Estimator& est, const GameSpec& g, const JointAction& a)
{
    std::vector<Mask> m = a.actions;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n(); ++i) {
        const Mask own = m[i];
        const double low = est.lcb(m.data(), i);
        double up = -std::numeric_limits<double>::infinity();
        for (Mask alt : g.actions(i)) {
            m[i] = alt;
            up = std::max(up, est.ucb(m.data(), i));
        }
        m[i] = own;
        worst = std::max(worst, up - low);
    }
    return worst;
}

GapReport solve_mixed(const Estimator& est, const GameSpec& g, const SolverConfig& cfg)
{
    cfg.validate();
    MixedProfile phi = MixedProfile::uniform(g);
    GapReport best = surrogate_gap(est, g, phi, cfg, 0);
    double prev = best.surrogate_gap;
    Rng order_rng(derive_seed(cfg.seed, 0x0bde7));
    std::vector<int> order(g.n());
    std::iota(order.begin(), order.end(), 0);
    int t = 1;
    bool converged = false;
    for (; t <= cfg.max_rounds; ++t) {
        const double eta = cfg.fixed_eta ? *cfg.fixed_eta : 2.0 / (t + 2.0);
        if (cfg.random_order) std::shuffle(order.begin(), order.end(), order_rng);
        const MixedProfile base = phi;
        for (int i : order) {
            const std::uint64_t stream = (static_cast<std::uint64_t>(t) << 20) + 0x80000 + static_cast<std::uint64_t>(i);
            const auto br = optimistic_best_response(est, g, cfg.jacobi ? base : phi, i, cfg, stream);
            auto& p = phi.probs[i];
            for (double& x : p) x *= 1.0 - eta;
            p[br.action] += eta;
        }
        GapReport cur = surrogate_gap(est, g, phi, cfg, static_cast<std::uint64_t>(t));
        const double now = cur.surrogate_gap;
        if (now < best.surrogate_gap) best = std::move(cur);
        best.trace.push_back(best.surrogate_gap);
        if (std::abs(now - prev) < cfg.stop_threshold) {
            converged = true;
            break;
        }
        prev = now;
    }
    best.rounds = std::min(t, cfg.max_rounds);
    best.hit_max_rounds = !converged;
    best.regime = "mixed";
    best.eps_opt = 0.0;
    return best;
}

GapReport solve_pure(const Estimator& est, const GameSpec& g, const SolverConfig& cfg)
{
    cfg.validate();
    JointAction best_a;
    double best_v = std::numeric_limits<double>::infinity();
    std::string regime;
    int rounds = 0;
    bool hit_max = false;
    if (g.enumerable(cfg.budget)) {
        regime = "exhaustive";
        const std::uint64_t total = g.joint_count();
        constexpr int kBlocks = 64;
        std::vector<double> bv(kBlocks, std::numeric_limits<double>::infinity());
        std::vector<std::uint64_t> bi(kBlocks, 0);
#pragma omp parallel for schedule(dynamic) if (total >= 4096)
        for (int b = 0; b < kBlocks; ++b) {
            std::vector<int> idx;
            for (std::uint64_t t = total * b / kBlocks; t < total * (b + 1) / kBlocks; ++t) {
                decode_joint(g, t, idx);
                const double v = pure_surrogate(est, g, joint_from_indices(g, idx));
                if (v < bv[b]) {
                    bv[b] = v;
                    bi[b] = t;
                }
            }
        }
        // Blocks are in enumeration order, so the first strict minimum wins.
        std::uint64_t arg = 0;
        for (int b = 0; b < kBlocks; ++b)
            if (bv[b] < best_v) {
                best_v = bv[b];
                arg = bi[b];
            }
        std::vector<int> idx;
        decode_joint(g, arg, idx);
        best_a = joint_from_indices(g, idx);
        rounds = 1;
    } else {
        regime = "local_search";
        for (int r = 0; r < cfg.restarts; ++r) {
            Rng rng(derive_seed(cfg.seed, 0x10ca1, static_cast<std::uint64_t>(r)));
            JointAction a;
            for (int i = 0; i < g.n(); ++i) {
                const auto& as = g.actions(i);
                a.actions.push_back(as[static_cast<std::size_t>(uniform01(rng) * as.size())]);
            }
            double cur = pure_surrogate(est, g, a);
            bool moved = true;
            int it = 0;
            for (; it < cfg.max_rounds && moved; ++it) {
                moved = false;
                for (int i = 0; i < g.n(); ++i) {
                    const Mask own = a.actions[i];
                    Mask pick = own;
                    for (Mask alt : g.actions(i)) {
                        if (alt == own) continue;
                        a.actions[i] = alt;
                        const double v = pure_surrogate(est, g, a);
                        if (v < cur - 1e-12) {
                            cur = v;
                            pick = alt;
                        }
                    }
                    a.actions[i] = pick;
                    moved = moved || pick != own;
                }
            }
            rounds += it;
            hit_max = hit_max || moved;
            if (cur < best_v) {
                best_v = cur;
                best_a = a;
            }
        }
    }
    GapReport r = surrogate_gap(est, g, MixedProfile::point(g, best_a), cfg);
    r.regime = regime;
    r.rounds = rounds;
    r.hit_max_rounds = hit_max;
    r.trace = {r.surrogate_gap};
    return r;
}

GapReport solve(const Estimator& est, const GameSpec& g, const SolverConfig& cfg)
{
    return cfg.mode == SolverMode::mixed ? solve_mixed(est, g, cfg) : solve_pure(est, g, cfg);
}

void attach_exact_gap(GapReport& r, const GameSpec& g)
{
    if (g.enumerable()) r.exact_gap = exact_duality_gap(g, r.profile, EvalMode::exact_mode()).gap;
}

} // namespace pocf
