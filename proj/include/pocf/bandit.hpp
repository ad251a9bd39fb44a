#pragma once
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pocf/data.hpp"
#include "pocf/estimator.hpp"

namespace pocf {

// z_i(a) in R^{n^2 k}: block i (length nk, ordered [l][j]) holds 1{l in a_i and a_j}.
Eigen::VectorXd features(int n, int k, const Mask* a, int i);
Eigen::VectorXd features(const GameSpec& g, const JointAction& a, int i);
// Block i of z_i(a) alone.
Eigen::VectorXd agent_block(int n, int k, const Mask* a, int i);
// True parameter stacked like z; exact only for size-independent games.
Eigen::VectorXd true_theta(const GameSpec& g);

// sqrt(beta) = 2 sqrt(n^2 k) + sqrt(n^2 k log(1 + M/n) + iota), iota = 2 log(4(n+1)k/delta).
double sqrt_beta(int n, int k, double delta, double M);

class RidgeEstimator : public Estimator
{
public:
    RidgeEstimator(int n, int k, double delta);

    // Batch fit. Semi-bandit datasets are rejected unless reduce_semi is set, in which case
    // totals are rebuilt from the pairwise values.
    static RidgeEstimator fit(const Dataset& ds, double delta, bool reduce_semi = false);
    // Accumulates one record without refactoring; call finalize() before querying.
    void add(const JointAction& a, const std::vector<double>& totals);
    void finalize();

    int n() const override { return n_; }
    int k() const override { return k_; }
    double delta() const { return delta_; }
    std::int64_t records() const { return M_; }
    double beta() const { return beta_; }
    bool reduced_from_semi() const { return reduced_; }

    double estimate(const Mask* a, int i) const override;
    double bonus(const Mask* a, int i) const override;
    // sqrt(z^T V^-1 z beta) for an arbitrary vector in R^{n^2 k}.
    double bonus_of(const Eigen::VectorXd& z) const;

    // Dense V and theta-hat in the n^2 k layout.
    Eigen::MatrixXd dense_V() const;
    Eigen::VectorXd theta() const;
    const Eigen::MatrixXd& block(int i) const { return V_[i]; }
    const Eigen::MatrixXd& inverse_block(int i) const { return Vinv_[i]; }

    // theta-hat with theta^l_{ij} and theta^l_{ji} averaged; off by default.
    RidgeEstimator symmetrized() const;
    void scale_theta(double c);

    nlohmann::json to_json() const;
    static RidgeEstimator from_json(const nlohmann::json& j);

private:
    int n_;
    int k_;
    double delta_;
    std::int64_t M_ = 0;
    double beta_ = 0.0;
    bool reduced_ = false;
    std::vector<Eigen::MatrixXd> V_;    // per agent, nk x nk
    std::vector<Eigen::VectorXd> rhs_;  // sum of y_i v_i
    std::vector<Eigen::VectorXd> th_;   // per agent
    std::vector<Eigen::MatrixXd> Vinv_; // per agent, from the LLT factor
};

namespace serial {
// Dense n^2 k accumulation of V = I + sum z z^T; reference for the block route.
Eigen::MatrixXd gram(const Dataset& ds);
} // namespace serial

struct Assumption2Result
{
    bool ok = true;
    int agent = -1;
    Mask deviation = 0;
    double min_eigenvalue = 0.0; // smallest over all checks
    Eigen::VectorXd witness;     // eigenvector of the violating check, in R^{n^2 k}
};

// V >= I + M c_act E[z_i z_i^T] for every agent and pure deviation from ns.
Assumption2Result check_assumption2(const RidgeEstimator& est, const GameSpec& g, const MixedProfile& ns,
                                    double c_act, double M);
// Largest c_act passing check_assumption2, by bisection (0 when none does).
double max_action_coverage(const RidgeEstimator& est, const GameSpec& g, const MixedProfile& ns, double M);

double theoretical_bound_bandit(int n, int k, double beta, double c_act, double M, double eps_opt);
double required_samples_bandit(int n, int k, double beta, double c_act, double eps, double eps_opt);

// Full power-set action game policy: the pure profile plus every single-coalition toggle.
Policy deviation_policy(const GameSpec& g, const JointAction& ns);
double deviation_policy_min_samples(int n, int k, double delta);

} // namespace pocf
