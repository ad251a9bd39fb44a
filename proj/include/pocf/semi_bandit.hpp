#pragma once
#include <limits>
#include <optional>
#include <vector>

#include "pocf/data.hpp"
#include "pocf/estimator.hpp"

namespace pocf {

class SemiBanditEstimator : public Estimator
{
public:
    SemiBanditEstimator(int n, int k, double delta);

    static SemiBanditEstimator fit(const Dataset& ds, double delta);
    // Folds more records in; counts only grow.
    void add(const Record& r);

    int n() const override { return n_; }
    int k() const override { return k_; }
    double delta() const { return delta_; }

    std::int64_t count(int i, int j, int l) const { return count_[idx(i, j, l)]; }
    double mean(int i, int j, int l) const;
    // sqrt(2 log(4(n+1)k/delta) / (N v 1)) for one pair.
    double pair_bonus(int i, int j, int l) const;
    double log_term() const;

    double estimate(const Mask* a, int i) const override;
    double bonus(const Mask* a, int i) const override;

    double estimate(const JointAction& a, int i) const { return estimate(a.actions.data(), i); }
    double bonus(const JointAction& a, int i) const { return bonus(a.actions.data(), i); }
    std::vector<double> estimate_all(const JointAction& a) const;
    std::vector<double> bonus_all(const JointAction& a) const;
    std::vector<std::pair<double, double>> ucb_lcb(const JointAction& a) const;

    nlohmann::json to_json() const;
    static SemiBanditEstimator from_json(const nlohmann::json& j);

private:
    std::size_t idx(int i, int j, int l) const
    {
        return (static_cast<std::size_t>(l) * n_ + i) * n_ + j;
    }

    int n_;
    int k_;
    double delta_;
    std::vector<std::int64_t> count_;
    std::vector<double> sum_;
};

struct Assumption1Witness
{
    int agent = -1;
    int coalition = -1;
    Mask deviation = 0;
    int size = -1;
};

struct Assumption1Result
{
    bool ok = true;
    std::optional<Assumption1Witness> witness;
};

// Max density ratio over one-agent pure deviations; +inf when a deviation reaches a size
// the policy never produces.
double coalition_size_coefficient(const GameSpec& g, const Policy& rho, const MixedProfile& ns);
Assumption1Result check_assumption1(const GameSpec& g, const Policy& rho, const MixedProfile& ns);

enum class Variant { mixed, pure };

double semibandit_f(int n, int k, double c_size, double delta, Variant v);
double theoretical_bound_semibandit(int n, int k, double c_size, double delta, double M, double eps_opt,
                                    Variant v);
// Smallest M reaching eps; +inf when eps <= eps_opt.
double required_samples_semibandit(int n, int k, double c_size, double delta, double eps, double eps_opt,
                                   Variant v);

} // namespace pocf
