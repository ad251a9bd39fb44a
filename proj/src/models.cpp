#include "pocf/models.hpp"

#include <algorithm>
#include <cmath>

namespace pocf {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double clamp1(double x) { return std::clamp(x, -1.0, 1.0); }

} // namespace

double clamped_normal_mean(double m, double sigma)
{
    if (sigma <= 0.0) return clamp1(m);
    const double a = (-1.0 - m) / sigma;
    const double b = (1.0 - m) / sigma;
    const double pa = norm_cdf(a), pb = norm_cdf(b);
    const double r = -pa + (1.0 - pb) + m * (pb - pa) + sigma * (norm_pdf(a) - norm_pdf(b));
    return clamp1(r);
}

void SizeTableModel::sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng&,
                            std::vector<double>& out) const
{
    out.resize(slots.size());
    for (std::size_t s = 0; s < slots.size(); ++s) out[s] = table_[slots[s].l][sizes[slots[s].l]];
}

ExplicitModel::ExplicitModel(std::vector<std::vector<std::vector<double>>> table) : table_(std::move(table))
{
    for (auto& t : table_)
        for (std::size_t i = 0; i < t.size(); ++i) t[i][i] = 0.0;
}

void ExplicitModel::sample(const std::vector<PairSlot>& slots, const std::vector<int>&, Rng&,
                           std::vector<double>& out) const
{
    out.resize(slots.size());
    for (std::size_t s = 0; s < slots.size(); ++s) out[s] = table_[slots[s].l][slots[s].i][slots[s].j];
}

nlohmann::json ExplicitModel::describe() const { return {{"mean_table", table_}}; }

GeneratorKind parse_generator(const std::string& s)
{
    if (s == "uniform") return GeneratorKind::uniform;
    if (s == "gaussian") return GeneratorKind::gaussian;
    if (s == "size_uniform") return GeneratorKind::size_uniform;
    if (s == "size_gaussian") return GeneratorKind::size_gaussian;
    if (s == "mixed_effects") return GeneratorKind::mixed_effects;
    throw Error("unknown generator '" + s + "'");
}

const char* to_string(GeneratorKind k)
{
    switch (k) {
    case GeneratorKind::uniform: return "uniform";
    case GeneratorKind::gaussian: return "gaussian";
    case GeneratorKind::size_uniform: return "size_uniform";
    case GeneratorKind::size_gaussian: return "size_gaussian";
    case GeneratorKind::mixed_effects: return "mixed_effects";
    }
    return "?";
}

GeneratedModel::GeneratedModel(GeneratorKind kind, int n, int k, std::uint64_t seed, nlohmann::json params)
    : kind_(kind), n_(n), k_(k), seed_(seed), params_(std::move(params))
{
    if (kind_ == GeneratorKind::mixed_effects) throw Error("mixed_effects uses MixedEffectsModel");
    Rng rng(derive_seed(seed_, 0x9a3e));
    const bool per_coalition = kind_ == GeneratorKind::uniform || kind_ == GeneratorKind::size_uniform;
    const int layers = per_coalition ? k_ : 1;
    loc_.assign(static_cast<std::size_t>(layers) * n_ * n_, 0.0);
    for (int l = 0; l < layers; ++l)
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                const double x = 2.0 * uniform01(rng) - 1.0;
                loc_[(static_cast<std::size_t>(l) * n_ + i) * n_ + j] = x;
                loc_[(static_cast<std::size_t>(l) * n_ + j) * n_ + i] = x;
            }
}

double GeneratedModel::location(int i, int j, int l) const
{
    const bool per_coalition = kind_ == GeneratorKind::uniform || kind_ == GeneratorKind::size_uniform;
    const int layer = per_coalition ? l : 0;
    return loc_[(static_cast<std::size_t>(layer) * n_ + i) * n_ + j];
}

double GeneratedModel::mean(int i, int j, int l, int size) const
{
    const double x = location(i, j, l);
    switch (kind_) {
    case GeneratorKind::uniform: return x;
    case GeneratorKind::gaussian: return clamped_normal_mean(x, 1.0 - std::abs(x));
    case GeneratorKind::size_uniform: return scale(size) * x;
    case GeneratorKind::size_gaussian: return scale(size) * clamped_normal_mean(x, 1.0 - std::abs(x));
    default: return 0.0;
    }
}

NoiseKind GeneratedModel::noise() const
{
    return (kind_ == GeneratorKind::uniform || kind_ == GeneratorKind::size_uniform) ? NoiseKind::bounded_uniform
                                                                                     : NoiseKind::clamped_gaussian;
}

bool GeneratedModel::size_dependent() const
{
    return kind_ == GeneratorKind::size_uniform || kind_ == GeneratorKind::size_gaussian;
}

void GeneratedModel::sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng& rng,
                            std::vector<double>& out) const
{
    out.resize(slots.size());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& p = slots[s];
        const double x = location(p.i, p.j, p.l);
        const double width = 1.0 - std::abs(x);
        double u;
        if (noise() == NoiseKind::bounded_uniform) {
            u = x + width * (2.0 * uniform01(rng) - 1.0);
        } else {
            u = clamp1(x + width * normal(rng));
        }
        u = clamp1(u);
        out[s] = size_dependent() ? scale(sizes[p.l]) * u : u;
    }
}

nlohmann::json GeneratedModel::describe() const
{
    return {{"generator", {{"kind", to_string(kind_)}, {"params", params_}, {"seed", seed_}}}};
}

double MixedEffectsModel::shift(int l, int size) const
{
    const double s = static_cast<double>(size) / (n_ + 1);
    switch (l) {
    case 0: return -s;
    case 1:
    case 3: return -1.0;
    case 2: return 0.0;
    case 4: return s;
    default: return 0.0;
    }
}

double MixedEffectsModel::mean(int, int, int l, int size) const
{
    return clamped_normal_mean(shift(l, size), 1.0);
}

void MixedEffectsModel::sample(const std::vector<PairSlot>& slots, const std::vector<int>& sizes, Rng& rng,
                               std::vector<double>& out) const
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<double, 5> mu{};
    for (double& m : mu) m = normal(rng);
    out.resize(slots.size());
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const int l = slots[s].l;
        out[s] = clamp1(mu[l] + shift(l, sizes[l]));
    }
}

nlohmann::json MixedEffectsModel::describe() const
{
    return {{"generator", {{"kind", "mixed_effects"}, {"params", nlohmann::json::object()}, {"seed", 0}}}};
}

std::vector<Mask> mixed_effects_actions()
{
    return {0b00011, 0b10101, 0b11000};
}

GameSpec make_generated_game(GeneratorKind kind, int n, int k, std::uint64_t seed, const nlohmann::json& params,
                             std::optional<std::vector<std::vector<Mask>>> action_sets)
{
    if (kind == GeneratorKind::mixed_effects) {
        if (k != 5) throw Error("mixed_effects requires k = 5");
        std::vector<std::vector<Mask>> as(n, mixed_effects_actions());
        if (action_sets && *action_sets != as) throw Error("mixed_effects fixes the action sets");
        return GameSpec(n, 5, std::move(as), std::make_shared<MixedEffectsModel>(n),
                        "H-mixed(" + std::to_string(n) + ")");
    }
    if (k > 62 && !action_sets) throw Error("random action sets support k <= 62");
    std::vector<std::vector<Mask>> as;
    if (action_sets) {
        as = *action_sets;
    } else {
        Rng rng(derive_seed(seed, 0xac7));
        const std::uint64_t universe = (std::uint64_t{1} << k) - 1;
        const int want = params.value("action_set_size", 3);
        const int size = static_cast<int>(std::min<std::uint64_t>(std::max(1, want), universe));
        const bool shared = params.value("shared_actions", true);
        auto draw = [&] {
            // Rejection sampling keeps the draw order as insertion order.
            std::vector<Mask> out;
            while (static_cast<int>(out.size()) < size) {
                const Mask m = 1 + static_cast<Mask>(uniform01(rng) * static_cast<double>(universe));
                if (m <= universe && std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
            }
            return out;
        };
        if (shared) {
            as.assign(n, draw());
        } else {
            for (int i = 0; i < n; ++i) as.push_back(draw());
        }
    }
    return GameSpec(n, k, std::move(as), std::make_shared<GeneratedModel>(kind, n, k, seed, params),
                    std::string(to_string(kind)));
}

} // namespace pocf
