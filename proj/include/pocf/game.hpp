#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pocf/common.hpp"

namespace pocf {

enum class NoiseKind { deterministic, bounded_uniform, clamped_gaussian };

const char* to_string(NoiseKind k);

// One co-membership slot of a realized joint action: pair i<j inside coalition l.
struct PairSlot
{
    int i;
    int j;
    int l;
};

class UtilityModel
{
public:
    virtual ~UtilityModel() = default;

    // Mean of v^l_{ij} when |C_l| = size; only called with i != j.
    virtual double mean(int i, int j, int l, int size) const = 0;
    virtual NoiseKind noise() const = 0;
    virtual bool size_dependent() const = 0;
    // Fills out[s] with a draw for slots[s]; sizes[l] = |C_l|.
    virtual void sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng& rng,
                        std::vector<double>& out) const = 0;
    // Descriptor written into game files; null for models that cannot be serialized.
    virtual nlohmann::json describe() const;
};

class GameSpec
{
public:
    GameSpec(int n, int k, std::vector<std::vector<Mask>> action_sets, std::shared_ptr<const UtilityModel> model,
             std::string name = "");

    int n() const { return n_; }
    int k() const { return k_; }
    const std::string& name() const { return name_; }
    const std::vector<Mask>& actions(int i) const { return action_sets_[i]; }
    const std::vector<std::vector<Mask>>& action_sets() const { return action_sets_; }
    const UtilityModel& model() const { return *model_; }
    std::shared_ptr<const UtilityModel> model_ptr() const { return model_; }

    // Tabulated mean_law; 0 on the diagonal.
    double mean(int i, int j, int l, int size) const
    {
        return means_[((static_cast<std::size_t>(l) * (n_ + 1) + size) * n_ + i) * n_ + j];
    }
    bool size_dependent() const { return model_->size_dependent(); }

    // Position of `m` in agent i's action set, or -1.
    int index_of(int i, Mask m) const;
    // Number of joint actions, saturated at UINT64_MAX.
    std::uint64_t joint_count() const;
    bool enumerable(std::uint64_t budget = kEnumBudget) const { return joint_count() <= budget; }

private:
    int n_;
    int k_;
    std::vector<std::vector<Mask>> action_sets_;
    std::shared_ptr<const UtilityModel> model_;
    std::string name_;
    std::vector<double> means_;
};

struct JointAction
{
    std::vector<Mask> actions;

    bool operator==(const JointAction&) const = default;
    auto operator<=>(const JointAction&) const = default;
};

struct Partition
{
    std::vector<std::vector<int>> coalitions; // C_l, sorted agent ids

    // Number of nonempty coalitions.
    int nonempty() const;
};

struct MixedProfile
{
    std::vector<std::vector<double>> probs; // aligned with action_sets

    static MixedProfile uniform(const GameSpec& g);
    static MixedProfile point(const GameSpec& g, const JointAction& a);
    void validate(const GameSpec& g, double tol = 1e-9) const;
    bool is_pure() const;
};

// Rejects masks outside an agent's action set, naming the agent (1-based).
void validate_action(const GameSpec& g, const JointAction& a);

std::vector<int> coalition_sizes(int k, const Mask* a, int n);
Partition induce_partition(const GameSpec& g, const JointAction& a);

// d_i(a) on raw masks; sizes must match a.
double mean_utility_raw(const GameSpec& g, const Mask* a, const int* sizes, int i);
double mean_utility(const GameSpec& g, const JointAction& a, int i);
double potential(const GameSpec& g, const JointAction& a);

// Realized pairwise utilities for one joint action.
struct PairTable
{
    std::vector<PairSlot> slots; // ordered by (l, i, j), i < j
    std::vector<double> values;

    // v^l_{ij} for i != j, or 0 when the pair does not share coalition l.
    double value(int i, int j, int l) const;
    // Agent totals v_i(a).
    std::vector<double> totals(int n) const;
};

std::vector<PairSlot> pair_slots(const GameSpec& g, const Mask* a);
std::vector<PairSlot> pair_slots_raw(const Mask* a, int n, int k);
PairTable sample_utilities(const GameSpec& g, const JointAction& a, Rng& rng);

// Evaluation mode for expectations over product profiles.
struct EvalMode
{
    bool exact = true;
    int samples = 100;
    std::uint64_t seed = 0;
    std::uint64_t budget = kEnumBudget;

    static EvalMode exact_mode() { return {}; }
    static EvalMode monte_carlo(int samples, std::uint64_t seed)
    {
        return {false, samples, seed, kEnumBudget};
    }
};

struct Estimate
{
    double value = 0.0;
    double std_err = 0.0;
};

Estimate expected_utility(const GameSpec& g, const MixedProfile& phi, int i, const EvalMode& mode);

// Per-agent, per-pure-action expected payoff against the others' mixed strategies.
// f(a, i) is agent i's payoff at pure joint action a.
using AgentPayoff = std::function<double(const Mask* a, int i)>;

struct DeviationRow
{
    std::vector<double> value;  // E_{phi_-i}[f(a_i', .)] per action a_i'
    std::vector<double> std_err; // zero in exact mode
};

DeviationRow deviation_row(const GameSpec& g, const MixedProfile& phi, int i, const AgentPayoff& f,
                           const EvalMode& mode);

namespace serial {
DeviationRow deviation_row(const GameSpec& g, const MixedProfile& phi, int i, const AgentPayoff& f);
} // namespace serial

struct DualityGap
{
    double gap = 0.0;
    int agent = -1;          // maximizing agent
    int deviation = -1;      // index of its best pure deviation
    std::vector<double> local; // per-agent local gap
    std::vector<double> value; // V_i(phi)
    std::vector<double> best;  // max over pure deviations
    bool exact = true;
    double std_err = 0.0;
};

DualityGap exact_duality_gap(const GameSpec& g, const MixedProfile& phi, const EvalMode& mode);

// Mixed-radix decode of a joint-action index into per-agent action indices.
void decode_joint(const GameSpec& g, std::uint64_t idx, std::vector<int>& out);
JointAction joint_from_indices(const GameSpec& g, const std::vector<int>& idx);

std::string format_action(Mask m);
std::string format_joint(const JointAction& a);

} // namespace pocf
