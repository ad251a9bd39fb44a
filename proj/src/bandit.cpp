#include "pocf/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace pocf {

Eigen::VectorXd agent_block(int n, int k, const Mask* a, int i)
{
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * k);
    for (Mask m = a[i]; m; m &= m - 1) {
        const int l = __builtin_ctzll(m);
        for (int j = 0; j < n; ++j)
            if (has(a[j], l)) y[static_cast<Eigen::Index>(l) * n + j] = 1.0;
    }
    return y;
}

Eigen::VectorXd features(int n, int k, const Mask* a, int i)
{
    const Eigen::Index nk = static_cast<Eigen::Index>(n) * k;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(nk * n);
    z.segment(nk * i, nk) = agent_block(n, k, a, i);
    return z;
}

Eigen::VectorXd features(const GameSpec& g, const JointAction& a, int i)
{
    validate_action(g, a);
    return features(g.n(), g.k(), a.actions.data(), i);
}

Eigen::VectorXd true_theta(const GameSpec& g)
{
    const int n = g.n(), k = g.k();
    const Eigen::Index nk = static_cast<Eigen::Index>(n) * k;
    Eigen::VectorXd th = Eigen::VectorXd::Zero(nk * n);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l)
            for (int j = 0; j < n; ++j)
                if (j != i) th[nk * i + static_cast<Eigen::Index>(l) * n + j] = g.mean(i, j, l, std::min(2, n));
    return th;
}

double sqrt_beta(int n, int k, double delta, double M)
{
    const double d = static_cast<double>(n) * n * k;
    const double iota = 2.0 * std::log(4.0 * (n + 1.0) * k / delta);
    return 2.0 * std::sqrt(d) + std::sqrt(d * std::log(1.0 + M / n) + iota);
}

RidgeEstimator::RidgeEstimator(int n, int k, double delta) : n_(n), k_(k), delta_(delta)
{
    if (n < 1 || k < 1 || k > kMaxCoalitions) throw Error("estimator needs n >= 1 and 1 <= k <= 64");
    if (!(delta > 0.0 && delta <= 1.0)) throw Error("delta must lie in (0, 1]");
    const Eigen::Index nk = static_cast<Eigen::Index>(n) * k;
    V_.assign(n, Eigen::MatrixXd::Identity(nk, nk));
    rhs_.assign(n, Eigen::VectorXd::Zero(nk));
    th_.assign(n, Eigen::VectorXd::Zero(nk));
    Vinv_.assign(n, Eigen::MatrixXd::Identity(nk, nk));
    beta_ = std::pow(sqrt_beta(n, k, delta, 0.0), 2);
}

void RidgeEstimator::add(const JointAction& a, const std::vector<double>& totals)
{
    if (static_cast<int>(a.actions.size()) != n_ || static_cast<int>(totals.size()) != n_)
        throw Error("record does not match the estimator shape");
    for (int i = 0; i < n_; ++i) {
        const Eigen::VectorXd y = agent_block(n_, k_, a.actions.data(), i);
        V_[i].noalias() += y * y.transpose();
        rhs_[i] += totals[i] * y;
    }
    ++M_;
}

void RidgeEstimator::finalize()
{
    const Eigen::Index nk = static_cast<Eigen::Index>(n_) * k_;
    int failed = -1;
#pragma omp parallel for schedule(static) if (n_ * nk >= 256)
    for (int i = 0; i < n_; ++i) {
        Eigen::LLT<Eigen::MatrixXd> llt(V_[i]);
        if (llt.info() != Eigen::Success) {
#pragma omp critical
            failed = std::max(failed, i);
            continue;
        }
        th_[i] = llt.solve(rhs_[i]);
        Vinv_[i] = llt.solve(Eigen::MatrixXd::Identity(nk, nk));
    }
    if (failed >= 0)
        throw Error("design matrix block of agent " + std::to_string(failed + 1) + " is not positive definite");
    beta_ = std::pow(sqrt_beta(n_, k_, delta_, static_cast<double>(M_)), 2);
}

RidgeEstimator RidgeEstimator::fit(const Dataset& ds, double delta, bool reduce_semi)
{
    if (ds.feedback != Feedback::bandit && !reduce_semi)
        throw FeedbackMismatch("ridge estimator needs a bandit dataset, got semi-bandit feedback");
    RidgeEstimator est(ds.n, ds.k, delta);
    est.reduced_ = ds.feedback == Feedback::semi;
    const int n = ds.n, k = ds.k;
    const Eigen::Index nk = static_cast<Eigen::Index>(n) * k;
    const std::int64_t M = static_cast<std::int64_t>(ds.records.size());
    // Blocks are independent, so agents split across threads without changing sums.
#pragma omp parallel for schedule(static) if (M * n * nk >= 100000)
    for (int i = 0; i < n; ++i) {
        for (const auto& r : ds.records) {
            const Eigen::VectorXd y = agent_block(n, k, r.a.actions.data(), i);
            double v;
            if (ds.feedback == Feedback::bandit) {
                v = r.bandit[i];
            } else {
                v = 0.0;
                for (std::size_t t = 0; t < r.semi.slots.size(); ++t)
                    if (r.semi.slots[t].i == i || r.semi.slots[t].j == i) v += r.semi.values[t];
            }
            est.V_[i].noalias() += y * y.transpose();
            est.rhs_[i] += v * y;
        }
    }
    est.M_ = M;
    est.finalize();
    return est;
}

double RidgeEstimator::estimate(const Mask* a, int i) const
{
    double v = 0.0;
    const auto& th = th_[i];
    for (Mask m = a[i]; m; m &= m - 1) {
        const int l = __builtin_ctzll(m);
        for (int j = 0; j < n_; ++j)
            if (has(a[j], l)) v += th[static_cast<Eigen::Index>(l) * n_ + j];
    }
    return v;
}

double RidgeEstimator::bonus(const Mask* a, int i) const
{
    int idx[64 * 64];
    int c = 0;
    for (Mask m = a[i]; m; m &= m - 1) {
        const int l = __builtin_ctzll(m);
        for (int j = 0; j < n_; ++j)
            if (has(a[j], l)) {
                if (c == 64 * 64) return bonus_of(features(n_, k_, a, i));
                idx[c++] = l * n_ + j;
            }
    }
    const auto& W = Vinv_[i];
    double q = 0.0;
    for (int p = 0; p < c; ++p) {
        q += W(idx[p], idx[p]);
        for (int r = p + 1; r < c; ++r) q += 2.0 * W(idx[p], idx[r]);
    }
    return std::sqrt(std::max(0.0, q) * beta_);
}

double RidgeEstimator::bonus_of(const Eigen::VectorXd& z) const
{
    const Eigen::Index nk = static_cast<Eigen::Index>(n_) * k_;
    if (z.size() != nk * n_) throw Error("feature vector has the wrong dimension");
    double q = 0.0;
    for (int i = 0; i < n_; ++i) {
        const auto s = z.segment(nk * i, nk);
        q += s.dot(Vinv_[i] * s);
    }
    return std::sqrt(std::max(0.0, q) * beta_);
}

Eigen::MatrixXd RidgeEstimator::dense_V() const
{
    const Eigen::Index nk = static_cast<Eigen::Index>(n_) * k_;
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nk * n_, nk * n_);
    for (int i = 0; i < n_; ++i) V.block(nk * i, nk * i, nk, nk) = V_[i];
    return V;
}

Eigen::VectorXd RidgeEstimator::theta() const
{
    const Eigen::Index nk = static_cast<Eigen::Index>(n_) * k_;
    Eigen::VectorXd t(nk * n_);
    for (int i = 0; i < n_; ++i) t.segment(nk * i, nk) = th_[i];
    return t;
}

RidgeEstimator RidgeEstimator::symmetrized() const
{
    RidgeEstimator e = *this;
    for (int l = 0; l < k_; ++l)
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                const Eigen::Index pi = static_cast<Eigen::Index>(l) * n_ + j;
                const Eigen::Index pj = static_cast<Eigen::Index>(l) * n_ + i;
                const double avg = 0.5 * (th_[i][pi] + th_[j][pj]);
                e.th_[i][pi] = avg;
                e.th_[j][pj] = avg;
            }
    return e;
}

void RidgeEstimator::scale_theta(double c)
{
    for (auto& t : th_) t *= c;
}

nlohmann::json RidgeEstimator::to_json() const
{
    const Eigen::MatrixXd V = dense_V();
    std::vector<double> flat(static_cast<std::size_t>(V.size()));
    for (Eigen::Index r = 0; r < V.rows(); ++r)
        for (Eigen::Index c = 0; c < V.cols(); ++c) flat[r * V.cols() + c] = V(r, c);
    const Eigen::VectorXd t = theta();
    return {{"kind", "bandit"},
            {"n", n_},
            {"k", k_},
            {"delta", delta_},
            {"M", M_},
            {"beta", beta_},
            {"reduced_from_semi", reduced_},
            {"layout", "z_i block i of length n*k, entry l*n + j, 0-based; V row-major"},
            {"V", flat},
            {"theta", std::vector<double>(t.data(), t.data() + t.size())}};
}

RidgeEstimator RidgeEstimator::from_json(const nlohmann::json& j)
{
    if (j.at("kind").get<std::string>() != "bandit") throw Error("estimator file is not a ridge estimator");
    RidgeEstimator e(j.at("n").get<int>(), j.at("k").get<int>(), j.at("delta").get<double>());
    e.M_ = j.at("M").get<std::int64_t>();
    e.reduced_ = j.value("reduced_from_semi", false);
    const auto flat = j.at("V").get<std::vector<double>>();
    const auto th = j.at("theta").get<std::vector<double>>();
    const Eigen::Index nk = static_cast<Eigen::Index>(e.n_) * e.k_;
    const Eigen::Index d = nk * e.n_;
    if (static_cast<Eigen::Index>(flat.size()) != d * d || static_cast<Eigen::Index>(th.size()) != d)
        throw Error("ridge estimator arrays have the wrong size");
    for (int i = 0; i < e.n_; ++i) {
        for (Eigen::Index r = 0; r < nk; ++r)
            for (Eigen::Index c = 0; c < nk; ++c) e.V_[i](r, c) = flat[(nk * i + r) * d + nk * i + c];
        Eigen::VectorXd t(nk);
        for (Eigen::Index r = 0; r < nk; ++r) t[r] = th[nk * i + r];
        e.rhs_[i] = e.V_[i] * t;
    }
    e.finalize();
    return e;
}

namespace serial {

Eigen::MatrixXd gram(const Dataset& ds)
{
    const Eigen::Index d = static_cast<Eigen::Index>(ds.n) * ds.n * ds.k;
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(d, d);
    for (const auto& r : ds.records)
        for (int i = 0; i < ds.n; ++i) {
            const Eigen::VectorXd z = features(ds.n, ds.k, r.a.actions.data(), i);
            V += z * z.transpose();
        }
    return V;
}

} // namespace serial

namespace {

// E[y_i y_i^T] with agent i fixed to `dev` and others drawn from ns.
Eigen::MatrixXd deviation_second_moment(const GameSpec& g, const MixedProfile& ns, int i, Mask dev)
{
    const int n = g.n(), k = g.k();
    const Eigen::Index nk = static_cast<Eigen::Index>(n) * k;
    std::vector<int> agents;
    std::vector<std::vector<int>> idx;
    std::uint64_t combos = 1;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        std::vector<int> s;
        for (std::size_t q = 0; q < ns.probs[j].size(); ++q)
            if (ns.probs[j][q] > 0.0) s.push_back(static_cast<int>(q));
        combos *= s.size();
        if (combos > kEnumBudget) throw BudgetExceeded("deviation support exceeds the enumeration budget");
        agents.push_back(j);
        idx.push_back(std::move(s));
    }
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nk, nk);
    std::vector<Mask> a(n, 0);
    a[i] = dev;
    for (std::uint64_t c = 0; c < combos; ++c) {
        std::uint64_t r = c;
        double w = 1.0;
        for (std::size_t t = 0; t < agents.size(); ++t) {
            const std::size_t q = r % idx[t].size();
            r /= idx[t].size();
            a[agents[t]] = g.actions(agents[t])[idx[t][q]];
            w *= ns.probs[agents[t]][idx[t][q]];
        }
        const Eigen::VectorXd y = agent_block(n, k, a.data(), i);
        E.noalias() += w * (y * y.transpose());
    }
    return E;
}

} // namespace

Assumption2Result check_assumption2(const RidgeEstimator& est, const GameSpec& g, const MixedProfile& ns,
                                    double c_act, double M)
{
    ns.validate(g);
    if (est.n() != g.n() || est.k() != g.k()) throw Error("estimator shape does not match the game");
    const Eigen::Index nk = static_cast<Eigen::Index>(g.n()) * g.k();
    Assumption2Result r;
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n(); ++i)
        for (Mask dev : g.actions(i)) {
            const Eigen::MatrixXd E = deviation_second_moment(g, ns, i, dev);
            const Eigen::MatrixXd D = est.block(i) - Eigen::MatrixXd::Identity(nk, nk) - (M * c_act) * E;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
            const double lam = es.eigenvalues()[0];
            if (lam < r.min_eigenvalue) r.min_eigenvalue = lam;
            if (lam < -1e-8 && r.ok) {
                r.ok = false;
                r.agent = i;
                r.deviation = dev;
                r.witness = Eigen::VectorXd::Zero(nk * g.n());
                r.witness.segment(nk * i, nk) = es.eigenvectors().col(0);
            }
        }
    return r;
}

double max_action_coverage(const RidgeEstimator& est, const GameSpec& g, const MixedProfile& ns, double M)
{
    auto ok = [&](double c) { return check_assumption2(est, g, ns, c, M).ok; };
    if (!ok(1e-12)) return 0.0;
    double lo = 1e-12, hi = 1.0;
    while (ok(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) return lo;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

double theoretical_bound_bandit(int n, int k, double beta, double c_act, double M, double eps_opt)
{
    if (c_act <= 0.0 || M <= 0.0) return std::numeric_limits<double>::infinity();
    return 4.0 * std::sqrt(static_cast<double>(n) * n * k * beta / (c_act * M)) + eps_opt;
}

double required_samples_bandit(int n, int k, double beta, double c_act, double eps, double eps_opt)
{
    if (eps <= eps_opt || c_act <= 0.0) return std::numeric_limits<double>::infinity();
    return 16.0 * n * n * k * beta / (c_act * (eps - eps_opt) * (eps - eps_opt));
}

Policy deviation_policy(const GameSpec& g, const JointAction& ns)
{
    validate_action(g, ns);
    std::set<JointAction> support{ns};
    for (int i = 0; i < g.n(); ++i)
        for (int l = 0; l < g.k(); ++l) {
            JointAction a = ns;
            a.actions[i] ^= Mask{1} << l;
            if (a.actions[i] != 0 && g.index_of(i, a.actions[i]) >= 0) support.insert(a);
        }
    std::vector<std::pair<JointAction, double>> table;
    for (const auto& a : support) table.emplace_back(a, 1.0 / static_cast<double>(support.size()));
    return Policy::explicit_table(g, std::move(table), "deviation_toggles");
}

double deviation_policy_min_samples(int n, int k, double delta)
{
    const double d = static_cast<double>(n) * k + 1.0;
    return 8.0 * d * std::log(d / delta);
}

} // namespace pocf
