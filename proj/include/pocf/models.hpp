#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pocf/game.hpp"

namespace pocf {

// E[clamp(X, -1, 1)] for X ~ N(m, sigma^2).
double clamped_normal_mean(double m, double sigma);

// Deterministic means that depend only on (l, |C_l|); used by the hand-built games.
class SizeTableModel : public UtilityModel
{
public:
    // table[l][s] for s = 0..n; entries for s < 2 are never read.
    explicit SizeTableModel(std::vector<std::vector<double>> table) : table_(std::move(table)) {}
    double mean(int, int, int l, int size) const override { return table_[l][size]; }
    NoiseKind noise() const override { return NoiseKind::deterministic; }
    bool size_dependent() const override { return true; }
    void sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng&,
                std::vector<double>& out) const override;
    nlohmann::json describe() const override { return {{"size_table", table_}}; }

private:
    std::vector<std::vector<double>> table_;
};

// Deterministic size-independent means given as mean_table[l][i][j].
class ExplicitModel : public UtilityModel
{
public:
    explicit ExplicitModel(std::vector<std::vector<std::vector<double>>> table);
    double mean(int i, int j, int l, int) const override { return table_[l][i][j]; }
    NoiseKind noise() const override { return NoiseKind::deterministic; }
    bool size_dependent() const override { return false; }
    void sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng&,
                std::vector<double>& out) const override;
    nlohmann::json describe() const override;

private:
    std::vector<std::vector<std::vector<double>>> table_;
};

enum class GeneratorKind { uniform, gaussian, size_uniform, size_gaussian, mixed_effects };

GeneratorKind parse_generator(const std::string& s);
const char* to_string(GeneratorKind k);

// Random utility laws. Per-game parameters are drawn once from the seed; samples are
// drawn per record.
class GeneratedModel : public UtilityModel
{
public:
    GeneratedModel(GeneratorKind kind, int n, int k, std::uint64_t seed, nlohmann::json params);
    double mean(int i, int j, int l, int size) const override;
    NoiseKind noise() const override;
    bool size_dependent() const override;
    void sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng& rng,
                std::vector<double>& out) const override;
    nlohmann::json describe() const override;

    GeneratorKind kind() const { return kind_; }
    // Per-game location parameter: d^l_ij (uniform kinds) or mu_ij (gaussian kinds).
    double location(int i, int j, int l) const;

private:
    double scale(int size) const { return static_cast<double>(size) / (n_ + 1); }

    GeneratorKind kind_;
    int n_;
    int k_;
    std::uint64_t seed_;
    nlohmann::json params_;
    std::vector<double> loc_; // [l][i][j] or [i][j]
};

// Coalition 1 penalizes crowding, 5 rewards it, 2 and 4 cost, 3 is neutral; the five
// location shocks are redrawn per record and shared by all pairs.
class MixedEffectsModel : public UtilityModel
{
public:
    explicit MixedEffectsModel(int n) : n_(n) {}
    double mean(int i, int j, int l, int size) const override;
    NoiseKind noise() const override { return NoiseKind::clamped_gaussian; }
    bool size_dependent() const override { return true; }
    void sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng& rng,
                std::vector<double>& out) const override;
    nlohmann::json describe() const override;

    double shift(int l, int size) const;

private:
    int n_;
};

// Action set {{1,2},{1,3,5},{4,5}} shared by every agent of the mixed-effects game.
std::vector<Mask> mixed_effects_actions();

// Builds a generated game. Without explicit action sets, every agent shares one set of
// `action_set_size` (default 3) distinct nonempty subsets drawn from the seed.
GameSpec make_generated_game(GeneratorKind kind, int n, int k, std::uint64_t seed,
                             const nlohmann::json& params = nlohmann::json::object(),
                             std::optional<std::vector<std::vector<Mask>>> action_sets = std::nullopt);

} // namespace pocf
