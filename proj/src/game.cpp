#include "pocf/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pocf {

const char* to_string(NoiseKind k)
{
    switch (k) {
    case NoiseKind::deterministic: return "deterministic";
    case NoiseKind::bounded_uniform: return "bounded-uniform";
    case NoiseKind::clamped_gaussian: return "clamped-gaussian";
    }
    return "?";
}

nlohmann::json UtilityModel::describe() const { return nullptr; }

GameSpec::GameSpec(int n, int k, std::vector<std::vector<Mask>> action_sets,
                   std::shared_ptr<const UtilityModel> model, std::string name)
    : n_(n), k_(k), action_sets_(std::move(action_sets)), model_(std::move(model)), name_(std::move(name))
{
    if (n_ < 1) throw Error("game needs at least one agent");
    if (k_ < 1 || k_ > kMaxCoalitions) throw Error("coalition count must be in [1, 64]");
    if (static_cast<int>(action_sets_.size()) != n_) throw Error("action_sets must list one set per agent");
    if (!model_) throw Error("game has no utility model");
    const Mask full = k_ == 64 ? ~Mask{0} : ((Mask{1} << k_) - 1);
    for (int i = 0; i < n_; ++i) {
        const auto& as = action_sets_[i];
        if (as.empty()) throw Error("agent " + std::to_string(i + 1) + " has an empty action set");
        for (std::size_t p = 0; p < as.size(); ++p) {
            if (as[p] == 0 || (as[p] & ~full))
                throw Error("agent " + std::to_string(i + 1) + " has an action outside {1.." + std::to_string(k_) + "}");
            for (std::size_t q = 0; q < p; ++q)
                if (as[q] == as[p]) throw Error("agent " + std::to_string(i + 1) + " lists an action twice");
        }
    }
    means_.assign(static_cast<std::size_t>(k_) * (n_ + 1) * n_ * n_, 0.0);
    for (int l = 0; l < k_; ++l)
        for (int s = 0; s <= n_; ++s)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    if (i == j) continue;
                    double m = model_->mean(i, j, l, s);
                    if (!(m >= -1.0 - 1e-12 && m <= 1.0 + 1e-12))
                        throw Error("mean utility outside [-1,1]");
                    means_[((static_cast<std::size_t>(l) * (n_ + 1) + s) * n_ + i) * n_ + j] = m;
                }
    for (int l = 0; l < k_; ++l)
        for (int s = 0; s <= n_; ++s)
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j)
                    if (std::abs(mean(i, j, l, s) - mean(j, i, l, s)) > 1e-12)
                        throw Error("mean utilities are not symmetric");
}

int GameSpec::index_of(int i, Mask m) const
{
    const auto& as = action_sets_[i];
    for (std::size_t p = 0; p < as.size(); ++p)
        if (as[p] == m) return static_cast<int>(p);
    return -1;
}

std::uint64_t GameSpec::joint_count() const
{
    std::uint64_t c = 1;
    for (const auto& as : action_sets_) {
        if (c > std::numeric_limits<std::uint64_t>::max() / as.size()) return std::numeric_limits<std::uint64_t>::max();
        c *= as.size();
    }
    return c;
}

int Partition::nonempty() const
{
    int c = 0;
    for (const auto& s : coalitions) c += !s.empty();
    return c;
}

MixedProfile MixedProfile::uniform(const GameSpec& g)
{
    MixedProfile p;
    for (int i = 0; i < g.n(); ++i) {
        const auto sz = g.actions(i).size();
        p.probs.emplace_back(sz, 1.0 / static_cast<double>(sz));
    }
    return p;
}

MixedProfile MixedProfile::point(const GameSpec& g, const JointAction& a)
{
    validate_action(g, a);
    MixedProfile p;
    for (int i = 0; i < g.n(); ++i) {
        std::vector<double> v(g.actions(i).size(), 0.0);
        v[g.index_of(i, a.actions[i])] = 1.0;
        p.probs.push_back(std::move(v));
    }
    return p;
}

void MixedProfile::validate(const GameSpec& g, double tol) const
{
    if (static_cast<int>(probs.size()) != g.n()) throw Error("profile has wrong agent count");
    for (int i = 0; i < g.n(); ++i) {
        if (probs[i].size() != g.actions(i).size())
            throw Error("profile of agent " + std::to_string(i + 1) + " does not match its action set");
        double s = 0.0;
        for (double p : probs[i]) {
            if (p < -tol) throw Error("negative probability for agent " + std::to_string(i + 1));
            s += p;
        }
        if (std::abs(s - 1.0) > tol) throw Error("profile of agent " + std::to_string(i + 1) + " does not sum to 1");
    }
}

bool MixedProfile::is_pure() const
{
    for (const auto& v : probs) {
        int ones = 0;
        for (double p : v) {
            if (p == 1.0) ++ones;
            else if (p != 0.0) return false;
        }
        if (ones != 1) return false;
    }
    return true;
}

void validate_action(const GameSpec& g, const JointAction& a)
{
    if (static_cast<int>(a.actions.size()) != g.n()) throw Error("joint action has wrong agent count");
    for (int i = 0; i < g.n(); ++i)
        if (g.index_of(i, a.actions[i]) < 0)
            throw Error("agent " + std::to_string(i + 1) + " plays " + format_action(a.actions[i]) +
                        ", which is not in its action set");
}

std::vector<int> coalition_sizes(int k, const Mask* a, int n)
{
    std::vector<int> s(k, 0);
    for (int i = 0; i < n; ++i)
        for (Mask m = a[i]; m; m &= m - 1) ++s[__builtin_ctzll(m)];
    return s;
}

Partition induce_partition(const GameSpec& g, const JointAction& a)
{
    validate_action(g, a);
    Partition p;
    p.coalitions.resize(g.k());
    for (int i = 0; i < g.n(); ++i)
        for (int l = 0; l < g.k(); ++l)
            if (has(a.actions[i], l)) p.coalitions[l].push_back(i);
    return p;
}

double mean_utility_raw(const GameSpec& g, const Mask* a, const int* sizes, int i)
{
    double u = 0.0;
    const int n = g.n();
    for (Mask m = a[i]; m; m &= m - 1) {
        const int l = __builtin_ctzll(m);
        if (sizes[l] < 2) continue;
        for (int j = 0; j < n; ++j)
            if (j != i && has(a[j], l)) u += g.mean(i, j, l, sizes[l]);
    }
    return u;
}

double mean_utility(const GameSpec& g, const JointAction& a, int i)
{
    validate_action(g, a);
    auto s = coalition_sizes(g.k(), a.actions.data(), g.n());
    return mean_utility_raw(g, a.actions.data(), s.data(), i);
}

double potential(const GameSpec& g, const JointAction& a)
{
    validate_action(g, a);
    auto s = coalition_sizes(g.k(), a.actions.data(), g.n());
    double p = 0.0;
    for (int i = 0; i < g.n(); ++i) p += mean_utility_raw(g, a.actions.data(), s.data(), i);
    return 0.5 * p;
}

double PairTable::value(int i, int j, int l) const
{
    if (i > j) std::swap(i, j);
    for (std::size_t s = 0; s < slots.size(); ++s)
        if (slots[s].i == i && slots[s].j == j && slots[s].l == l) return values[s];
    return 0.0;
}

std::vector<double> PairTable::totals(int n) const
{
    std::vector<double> t(n, 0.0);
    for (std::size_t s = 0; s < slots.size(); ++s) {
        t[slots[s].i] += values[s];
        t[slots[s].j] += values[s];
    }
    return t;
}

std::vector<PairSlot> pair_slots_raw(const Mask* a, int n, int k)
{
    std::vector<PairSlot> out;
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < n; ++i) {
            if (!has(a[i], l)) continue;
            for (int j = i + 1; j < n; ++j)
                if (has(a[j], l)) out.push_back({i, j, l});
        }
    return out;
}

std::vector<PairSlot> pair_slots(const GameSpec& g, const Mask* a) { return pair_slots_raw(a, g.n(), g.k()); }

PairTable sample_utilities(const GameSpec& g, const JointAction& a, Rng& rng)
{
    validate_action(g, a);
    PairTable t;
    t.slots = pair_slots(g, a.actions.data());
    auto sizes = coalition_sizes(g.k(), a.actions.data(), g.n());
    g.model().sample(t.slots, sizes, rng, t.values);
    return t;
}

namespace {

int draw_index(const std::vector<double>& p, Rng& rng)
{
    const double u = uniform01(rng);
    double c = 0.0;
    for (std::size_t q = 0; q < p.size(); ++q) {
        c += p[q];
        if (u < c) return static_cast<int>(q);
    }
    for (std::size_t q = p.size(); q-- > 0;)
        if (p[q] > 0.0) return static_cast<int>(q);
    return 0;
}

// Other agents' supports, as (agent, action indices, probabilities).
struct OtherSupport
{
    std::vector<int> agents;
    std::vector<std::vector<int>> idx;
    std::vector<std::vector<double>> w;
    std::uint64_t combos = 1;
};

OtherSupport other_support(const GameSpec& g, const MixedProfile& phi, int i)
{
    OtherSupport s;
    for (int j = 0; j < g.n(); ++j) {
        if (j == i) continue;
        std::vector<int> id;
        std::vector<double> w;
        for (std::size_t q = 0; q < phi.probs[j].size(); ++q)
            if (phi.probs[j][q] > 0.0) {
                id.push_back(static_cast<int>(q));
                w.push_back(phi.probs[j][q]);
            }
        s.combos *= id.size();
        s.agents.push_back(j);
        s.idx.push_back(std::move(id));
        s.w.push_back(std::move(w));
    }
    return s;
}

// Accumulates E[f(a_i', .)] over combos [lo, hi) into acc.
void accumulate_block(const GameSpec& g, const OtherSupport& s, int i, const AgentPayoff& f, std::uint64_t lo,
                      std::uint64_t hi, std::vector<double>& acc)
{
    std::vector<Mask> a(g.n(), 0);
    const auto& ai = g.actions(i);
    for (std::uint64_t c = lo; c < hi; ++c) {
        std::uint64_t r = c;
        double w = 1.0;
        for (std::size_t t = 0; t < s.agents.size(); ++t) {
            const std::size_t m = s.idx[t].size();
            const std::size_t q = r % m;
            r /= m;
            a[s.agents[t]] = g.actions(s.agents[t])[s.idx[t][q]];
            w *= s.w[t][q];
        }
        for (std::size_t q = 0; q < ai.size(); ++q) {
            a[i] = ai[q];
            acc[q] += w * f(a.data(), i);
        }
    }
}

void require_budget(const GameSpec& g, std::uint64_t budget)
{
    if (!g.enumerable(budget))
        throw BudgetExceeded("joint action space exceeds the enumeration budget of " + std::to_string(budget) +
                             "; use Monte Carlo mode");
}

} // namespace

namespace serial {

DeviationRow deviation_row(const GameSpec& g, const MixedProfile& phi, int i, const AgentPayoff& f)
{
    require_budget(g, kEnumBudget);
    auto s = other_support(g, phi, i);
    DeviationRow row;
    row.value.assign(g.actions(i).size(), 0.0);
    row.std_err.assign(g.actions(i).size(), 0.0);
    accumulate_block(g, s, i, f, 0, s.combos, row.value);
    return row;
}

} // namespace serial

DeviationRow deviation_row(const GameSpec& g, const MixedProfile& phi, int i, const AgentPayoff& f,
                           const EvalMode& mode)
{
    const std::size_t na = g.actions(i).size();
    DeviationRow row;
    row.value.assign(na, 0.0);
    row.std_err.assign(na, 0.0);
    if (mode.exact) {
        require_budget(g, mode.budget);
        auto s = other_support(g, phi, i);
        // Fixed block layout keeps the summation order independent of the thread count.
        const std::uint64_t blocks = std::min<std::uint64_t>(s.combos, 64);
        std::vector<std::vector<double>> part(blocks, std::vector<double>(na, 0.0));
#pragma omp parallel for schedule(static) if (s.combos >= 4096)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
            const std::uint64_t lo = s.combos * b / blocks;
            const std::uint64_t hi = s.combos * (b + 1) / blocks;
            accumulate_block(g, s, i, f, lo, hi, part[b]);
        }
        for (const auto& p : part)
            for (std::size_t q = 0; q < na; ++q) row.value[q] += p[q];
        return row;
    }
    if (mode.samples < 1) throw Error("Monte Carlo mode needs at least one sample");
    Rng rng(derive_seed(mode.seed, 0xde71a7e, static_cast<std::uint64_t>(i)));
    std::vector<Mask> a(g.n(), 0);
    std::vector<double> sum(na, 0.0), sq(na, 0.0);
    for (int t = 0; t < mode.samples; ++t) {
        for (int j = 0; j < g.n(); ++j)
            if (j != i) a[j] = g.actions(j)[draw_index(phi.probs[j], rng)];
        for (std::size_t q = 0; q < na; ++q) {
            a[i] = g.actions(i)[q];
            const double y = f(a.data(), i);
            sum[q] += y;
            sq[q] += y * y;
        }
    }
    const double S = mode.samples;
    for (std::size_t q = 0; q < na; ++q) {
        row.value[q] = sum[q] / S;
        const double var = S > 1 ? std::max(0.0, (sq[q] - S * row.value[q] * row.value[q]) / (S - 1)) : 0.0;
        row.std_err[q] = std::sqrt(var / S);
    }
    return row;
}

Estimate expected_utility(const GameSpec& g, const MixedProfile& phi, int i, const EvalMode& mode)
{
    phi.validate(g);
    AgentPayoff d = [&g](const Mask* a, int ag) {
        auto s = coalition_sizes(g.k(), a, g.n());
        return mean_utility_raw(g, a, s.data(), ag);
    };
    Estimate e;
    if (mode.exact) {
        auto row = deviation_row(g, phi, i, d, mode);
        for (std::size_t q = 0; q < row.value.size(); ++q) e.value += phi.probs[i][q] * row.value[q];
        return e;
    }
    if (mode.samples < 1) throw Error("Monte Carlo mode needs at least one sample");
    Rng rng(derive_seed(mode.seed, 0xe7a1, static_cast<std::uint64_t>(i)));
    std::vector<Mask> a(g.n());
    double sum = 0.0, sq = 0.0;
    for (int t = 0; t < mode.samples; ++t) {
        for (int j = 0; j < g.n(); ++j) a[j] = g.actions(j)[draw_index(phi.probs[j], rng)];
        const double y = d(a.data(), i);
        sum += y;
        sq += y * y;
    }
    const double S = mode.samples;
    e.value = sum / S;
    e.std_err = S > 1 ? std::sqrt(std::max(0.0, (sq - S * e.value * e.value) / (S - 1)) / S) : 0.0;
    return e;
}

DualityGap exact_duality_gap(const GameSpec& g, const MixedProfile& phi, const EvalMode& mode)
{
    phi.validate(g);
    AgentPayoff d = [&g](const Mask* a, int ag) {
        auto s = coalition_sizes(g.k(), a, g.n());
        return mean_utility_raw(g, a, s.data(), ag);
    };
    DualityGap r;
    r.exact = mode.exact;
    r.gap = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n(); ++i) {
        auto row = deviation_row(g, phi, i, d, mode);
        double v = 0.0, var = 0.0;
        int arg = 0;
        for (std::size_t q = 0; q < row.value.size(); ++q) {
            v += phi.probs[i][q] * row.value[q];
            var += phi.probs[i][q] * phi.probs[i][q] * row.std_err[q] * row.std_err[q];
            if (row.value[q] > row.value[arg] + 1e-12) arg = static_cast<int>(q);
        }
        const double local = row.value[arg] - v;
        r.value.push_back(v);
        r.best.push_back(row.value[arg]);
        r.local.push_back(local);
        if (local > r.gap) {
            r.gap = local;
            r.agent = i;
            r.deviation = arg;
            r.std_err = std::sqrt(var + row.std_err[arg] * row.std_err[arg]);
        }
    }
    // Round-off can leave a tiny negative local gap at an exact equilibrium.
    if (r.gap < 0.0 && r.gap > -1e-12) r.gap = 0.0;
    return r;
}

void decode_joint(const GameSpec& g, std::uint64_t idx, std::vector<int>& out)
{
    out.resize(g.n());
    for (int i = 0; i < g.n(); ++i) {
        const std::uint64_t m = g.actions(i).size();
        out[i] = static_cast<int>(idx % m);
        idx /= m;
    }
}

JointAction joint_from_indices(const GameSpec& g, const std::vector<int>& idx)
{
    JointAction a;
    a.actions.resize(g.n());
    for (int i = 0; i < g.n(); ++i) a.actions[i] = g.actions(i)[idx[i]];
    return a;
}

std::string format_action(Mask m)
{
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (int l = 0; l < 64; ++l)
        if (has(m, l)) {
            if (!first) os << ',';
            os << (l + 1);
            first = false;
        }
    os << '}';
    return os.str();
}

std::string format_joint(const JointAction& a)
{
    std::string s = "(";
    for (std::size_t i = 0; i < a.actions.size(); ++i) {
        if (i) s += ",";
        s += format_action(a.actions[i]);
    }
    return s + ")";
}

} // namespace pocf
