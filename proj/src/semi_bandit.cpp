#include "pocf/semi_bandit.hpp"

#include <cmath>

namespace pocf {

double OracleEstimator::estimate(const Mask* a, int i) const
{
    auto s = coalition_sizes(g_.k(), a, g_.n());
    return mean_utility_raw(g_, a, s.data(), i);
}

SemiBanditEstimator::SemiBanditEstimator(int n, int k, double delta) : n_(n), k_(k), delta_(delta)
{
    if (n < 1 || k < 1 || k > kMaxCoalitions) throw Error("estimator needs n >= 1 and 1 <= k <= 64");
    if (!(delta > 0.0 && delta <= 1.0)) throw Error("delta must lie in (0, 1]");
    count_.assign(static_cast<std::size_t>(k) * n * n, 0);
    sum_.assign(count_.size(), 0.0);
}

SemiBanditEstimator SemiBanditEstimator::fit(const Dataset& ds, double delta)
{
    if (ds.feedback != Feedback::semi)
        throw FeedbackMismatch("semi-bandit estimator needs a semi-bandit dataset, got bandit feedback");
    SemiBanditEstimator est(ds.n, ds.k, delta);
    for (const auto& r : ds.records) est.add(r);
    return est;
}

void SemiBanditEstimator::add(const Record& r)
{
    for (std::size_t t = 0; t < r.semi.slots.size(); ++t) {
        const auto& p = r.semi.slots[t];
        const double v = r.semi.values[t];
        ++count_[idx(p.i, p.j, p.l)];
        ++count_[idx(p.j, p.i, p.l)];
        sum_[idx(p.i, p.j, p.l)] += v;
        sum_[idx(p.j, p.i, p.l)] += v;
    }
}

double SemiBanditEstimator::mean(int i, int j, int l) const
{
    const auto c = count_[idx(i, j, l)];
    return c > 0 ? sum_[idx(i, j, l)] / static_cast<double>(c) : 0.0;
}

double SemiBanditEstimator::log_term() const
{
    return std::log(4.0 * (n_ + 1) * k_ / delta_);
}

double SemiBanditEstimator::pair_bonus(int i, int j, int l) const
{
    const auto c = std::max<std::int64_t>(count_[idx(i, j, l)], 1);
    return std::sqrt(2.0 * log_term() / static_cast<double>(c));
}

double SemiBanditEstimator::estimate(const Mask* a, int i) const
{
    double v = 0.0;
    for (Mask m = a[i]; m; m &= m - 1) {
        const int l = __builtin_ctzll(m);
        for (int j = 0; j < n_; ++j)
            if (j != i && has(a[j], l)) v += mean(i, j, l);
    }
    return v;
}

double SemiBanditEstimator::bonus(const Mask* a, int i) const
{
    const double w = std::sqrt(2.0 * log_term());
    double b = 0.0;
    for (Mask m = a[i]; m; m &= m - 1) {
        const int l = __builtin_ctzll(m);
        for (int j = 0; j < n_; ++j)
            if (j != i && has(a[j], l))
                b += w / std::sqrt(static_cast<double>(std::max<std::int64_t>(count_[idx(i, j, l)], 1)));
    }
    return b;
}

std::vector<double> SemiBanditEstimator::estimate_all(const JointAction& a) const
{
    std::vector<double> v(n_);
    for (int i = 0; i < n_; ++i) v[i] = estimate(a.actions.data(), i);
    return v;
}

std::vector<double> SemiBanditEstimator::bonus_all(const JointAction& a) const
{
    std::vector<double> v(n_);
    for (int i = 0; i < n_; ++i) v[i] = bonus(a.actions.data(), i);
    return v;
}

std::vector<std::pair<double, double>> SemiBanditEstimator::ucb_lcb(const JointAction& a) const
{
    std::vector<std::pair<double, double>> out(n_);
    for (int i = 0; i < n_; ++i) {
        const double e = estimate(a.actions.data(), i), b = bonus(a.actions.data(), i);
        out[i] = {e + b, e - b};
    }
    return out;
}

nlohmann::json SemiBanditEstimator::to_json() const
{
    std::vector<double> means(count_.size());
    for (int l = 0; l < k_; ++l)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) means[idx(i, j, l)] = mean(i, j, l);
    return {{"kind", "semi"},
            {"n", n_},
            {"k", k_},
            {"delta", delta_},
            {"layout", "index (l*n + i)*n + j, 0-based"},
            {"counts", count_},
            {"sums", sum_},
            {"means", means}};
}

SemiBanditEstimator SemiBanditEstimator::from_json(const nlohmann::json& j)
{
    if (j.at("kind").get<std::string>() != "semi") throw Error("estimator file is not a semi-bandit estimator");
    SemiBanditEstimator e(j.at("n").get<int>(), j.at("k").get<int>(), j.at("delta").get<double>());
    auto counts = j.at("counts").get<std::vector<std::int64_t>>();
    if (counts.size() != e.count_.size()) throw Error("estimator counts have the wrong length");
    e.count_ = std::move(counts);
    if (j.contains("sums")) {
        e.sum_ = j.at("sums").get<std::vector<double>>();
    } else {
        auto means = j.at("means").get<std::vector<double>>();
        if (means.size() != e.count_.size()) throw Error("estimator means have the wrong length");
        for (std::size_t t = 0; t < means.size(); ++t) e.sum_[t] = means[t] * static_cast<double>(e.count_[t]);
    }
    if (e.sum_.size() != e.count_.size()) throw Error("estimator sums have the wrong length");
    return e;
}

namespace {

// Visits every (agent, coalition, pure deviation, size) with the deviation density and the
// policy density; stops early when visit returns false.
template <class F>
void for_each_deviation_density(const GameSpec& g, const Policy& rho, const MixedProfile& ns, F&& visit)
{
    ns.validate(g);
    std::vector<std::vector<double>> rho_d(g.k());
    for (int l = 0; l < g.k(); ++l) rho_d[l] = size_density(g, rho, l);
    for (int i = 0; i < g.n(); ++i)
        for (std::size_t q = 0; q < g.actions(i).size(); ++q) {
            MixedProfile dev = ns;
            std::fill(dev.probs[i].begin(), dev.probs[i].end(), 0.0);
            dev.probs[i][q] = 1.0;
            for (int l = 0; l < g.k(); ++l) {
                auto d = size_density(g, dev, l);
                for (int s = 0; s <= g.n(); ++s)
                    if (!visit(i, l, g.actions(i)[q], s, d[s], rho_d[l][s])) return;
            }
        }
}

} // namespace

double coalition_size_coefficient(const GameSpec& g, const Policy& rho, const MixedProfile& ns)
{
    double c = 0.0;
    for_each_deviation_density(g, rho, ns, [&](int, int, Mask, int, double dev, double pol) {
        if (pol > 0.0) {
            c = std::max(c, dev / pol);
        } else if (dev > 0.0) {
            c = std::numeric_limits<double>::infinity();
            return false;
        }
        return true;
    });
    return c;
}

Assumption1Result check_assumption1(const GameSpec& g, const Policy& rho, const MixedProfile& ns)
{
    Assumption1Result r;
    for_each_deviation_density(g, rho, ns, [&](int i, int l, Mask m, int s, double dev, double pol) {
        if (dev > 0.0 && pol <= 0.0) {
            r.ok = false;
            r.witness = Assumption1Witness{i, l, m, s};
            return false;
        }
        return true;
    });
    return r;
}

double semibandit_f(int n, int k, double c_size, double delta, Variant v)
{
    if (n <= 1) return 0.0;
    const double lead = v == Variant::mixed ? 8.0 * k * n * (n + 1.0) : 24.0 * k * n;
    const double nn = n;
    return lead * c_size * std::log(4.0 * (nn + 1) * k / delta) * std::sqrt(2.0 * (nn - 1)) *
           ((nn - 1) / 2.0 + std::sqrt(nn / 2.0));
}

double theoretical_bound_semibandit(int n, int k, double c_size, double delta, double M, double eps_opt,
                                    Variant v)
{
    const double f = semibandit_f(n, k, c_size, delta, v);
    if (f == 0.0) return eps_opt;
    if (M <= 0.0) return std::numeric_limits<double>::infinity();
    return f / std::sqrt(M) + eps_opt;
}

double required_samples_semibandit(int n, int k, double c_size, double delta, double eps, double eps_opt,
                                   Variant v)
{
    if (eps <= eps_opt) return std::numeric_limits<double>::infinity();
    const double f = semibandit_f(n, k, c_size, delta, v);
    return f * f / ((eps - eps_opt) * (eps - eps_opt));
}

} // namespace pocf
