#pragma once
#include <string>
#include <utility>
#include <vector>

#include "pocf/game.hpp"

namespace pocf {

// Exploration policy: either a product of per-agent strategies or an explicit joint table.
class Policy
{
public:
    static Policy uniform_random(const GameSpec& g);
    // Agent 1 uniform; every other agent plays the second action inserted into its set.
    static Policy one_rand(const GameSpec& g);
    static Policy product(const GameSpec& g, MixedProfile phi, std::string descriptor);
    static Policy explicit_table(const GameSpec& g, std::vector<std::pair<JointAction, double>> table,
                                 std::string descriptor);

    bool is_product() const { return product_; }
    const MixedProfile& profile() const { return phi_; }
    const std::vector<JointAction>& support() const { return support_; }
    const std::vector<double>& probabilities() const { return prob_; }
    const std::string& descriptor() const { return descriptor_; }

    double probability(const GameSpec& g, const JointAction& a) const;
    JointAction sample(const GameSpec& g, Rng& rng) const;

private:
    bool product_ = true;
    MixedProfile phi_;
    std::vector<JointAction> support_;
    std::vector<double> prob_;
    std::vector<double> cdf_;
    std::string descriptor_;
};

// P(|C_l| = alpha) for alpha = 0..n.
std::vector<double> size_density(const GameSpec& g, const MixedProfile& phi, int l);
std::vector<double> size_density(const GameSpec& g, const Policy& rho, int l);
double coalition_size_density(const GameSpec& g, const Policy& rho, int l, int alpha);
double coalition_size_density(const GameSpec& g, const MixedProfile& phi, int l, int alpha);

enum class Feedback { semi, bandit };
const char* to_string(Feedback f);
Feedback parse_feedback(const std::string& s);

struct Record
{
    JointAction a;
    PairTable semi;            // semi-bandit: each unordered pair once per shared coalition
    std::vector<double> bandit; // bandit: per-agent totals
};

struct Dataset
{
    Feedback feedback = Feedback::semi;
    int n = 0;
    int k = 0;
    std::vector<Record> records;
    nlohmann::json meta = nlohmann::json::object();

    std::size_t size() const { return records.size(); }
};

// Draws record m from its own stream, so records are reproducible in isolation.
Record sample_record(const GameSpec& g, const Policy& rho, Feedback fb, std::uint64_t seed, std::uint64_t m);
// Both feedback views of record m from one utility table.
std::pair<Record, Record> sample_record_both(const GameSpec& g, const Policy& rho, std::uint64_t seed,
                                             std::uint64_t m);

Dataset sample_dataset(const GameSpec& g, const Policy& rho, std::int64_t M, Feedback fb, std::uint64_t seed);

namespace serial {
Dataset sample_dataset(const GameSpec& g, const Policy& rho, std::int64_t M, Feedback fb, std::uint64_t seed);
} // namespace serial

// FNV-1a over the canonical game description.
std::string game_hash(const GameSpec& g);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);
std::string dataset_to_string(const Dataset& ds);
Dataset dataset_from_string(const std::string& text);

bool operator==(const Record& a, const Record& b);
bool operator==(const Dataset& a, const Dataset& b);

} // namespace pocf
