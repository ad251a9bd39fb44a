#include "doctest.h"

#include <numbers>

#include "pocf/builtins.hpp"
#include "test_util.hpp"

using namespace pocf;
using namespace testutil;

namespace {

// Composite Simpson rule for E[clamp(X,-1,1)], X ~ N(m, s^2), split at the kinks +-1.
double simpson_clamped_mean(double m, double s)
{
    auto f = [&](double x) {
        const double z = (x - m) / s;
        return std::clamp(x, -1.0, 1.0) * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    };
    auto simpson = [&](double lo, double hi) {
        if (hi <= lo) return 0.0;
        const int N = 20000;
        const double h = (hi - lo) / N;
        double acc = f(lo) + f(hi);
        for (int t = 1; t < N; ++t) acc += (t % 2 ? 4.0 : 2.0) * f(lo + t * h);
        return acc * h / 3.0;
    };
    const double lo = m - 12.0 * s, hi = m + 12.0 * s;
    return simpson(lo, std::min(-1.0, hi)) + simpson(std::max(-1.0, lo), std::min(1.0, hi)) +
           simpson(std::max(1.0, lo), hi);
}

} // namespace

TEST_CASE("clamped normal mean matches quadrature")
{
    for (double m : {-1.0, -0.7, -0.2, 0.0, 0.3, 0.9, 1.0})
        for (double s : {0.05, 0.3, 1.0, 2.0})
            CHECK(clamped_normal_mean(m, s) == doctest::Approx(simpson_clamped_mean(m, s)).epsilon(1e-9).scale(1.0));
    CHECK(clamped_normal_mean(0.4, 0.0) == 0.4);
    CHECK(clamped_normal_mean(0.0, 1.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("every generator stays inside [-1,1]")
{
    for (auto kind : {GeneratorKind::uniform, GeneratorKind::gaussian, GeneratorKind::size_uniform,
                      GeneratorKind::size_gaussian, GeneratorKind::mixed_effects}) {
        const int k = kind == GeneratorKind::mixed_effects ? 5 : 3;
        auto g = make_generated_game(kind, 5, k, 17);
        Rng rng(99);
        bool inside = true;
        for (int t = 0; t < 2000; ++t) {
            auto a = random_joint(g, rng);
            for (double v : sample_utilities(g, a, rng).values) inside = inside && std::abs(v) <= 1.0;
        }
        CHECK_MESSAGE(inside, to_string(kind));
    }
}

TEST_CASE("size-dependent generators respect the size scale")
{
    const int n = 6;
    for (auto kind : {GeneratorKind::size_uniform, GeneratorKind::size_gaussian}) {
        auto g = make_generated_game(kind, n, 3, 23, {{"action_set_size", 7}});
        CHECK(g.size_dependent());
        Rng rng(5);
        bool ok = true;
        for (int t = 0; t < 2000; ++t) {
            auto a = random_joint(g, rng);
            auto sizes = coalition_sizes(3, a.actions.data(), n);
            auto tab = sample_utilities(g, a, rng);
            for (std::size_t s = 0; s < tab.slots.size(); ++s)
                ok = ok && std::abs(tab.values[s]) <= static_cast<double>(sizes[tab.slots[s].l]) / (n + 1) + 1e-15;
        }
        CHECK_MESSAGE(ok, to_string(kind));
    }
}

TEST_CASE("sample means converge to mean_law")
{
    for (auto kind : {GeneratorKind::uniform, GeneratorKind::gaussian, GeneratorKind::size_gaussian,
                      GeneratorKind::mixed_effects}) {
        const int k = kind == GeneratorKind::mixed_effects ? 5 : 2;
        auto g = make_generated_game(kind, 3, k, 41);
        Rng rng(1);
        auto a = random_joint(g, rng);
        auto sizes = coalition_sizes(k, a.actions.data(), 3);
        auto slots = pair_slots(g, a.actions.data());
        if (slots.empty()) continue;
        std::vector<double> sum(slots.size(), 0.0);
        const int T = 40000;
        for (int t = 0; t < T; ++t) {
            auto tab = sample_utilities(g, a, rng);
            for (std::size_t s = 0; s < slots.size(); ++s) sum[s] += tab.values[s];
        }
        for (std::size_t s = 0; s < slots.size(); ++s) {
            const auto& p = slots[s];
            // Values are bounded by 1, so 5/sqrt(T) is a loose 5-sigma band.
            CHECK(std::abs(sum[s] / T - g.mean(p.i, p.j, p.l, sizes[p.l])) < 5.0 / std::sqrt(T));
        }
    }
}

TEST_CASE("generated games are reproducible from the seed")
{
    auto a = make_generated_game(GeneratorKind::gaussian, 5, 4, 314);
    auto b = make_generated_game(GeneratorKind::gaussian, 5, 4, 314);
    auto c = make_generated_game(GeneratorKind::gaussian, 5, 4, 315);
    CHECK(a.action_sets() == b.action_sets());
    CHECK(a.mean(0, 1, 2, 3) == b.mean(0, 1, 2, 3));
    CHECK(game_hash(a) == game_hash(b));
    CHECK(game_hash(a) != game_hash(c));
    for (int i = 0; i < 5; ++i) CHECK(a.actions(i).size() == 3);
}

TEST_CASE("generated means are symmetric with a zero diagonal")
{
    auto g = make_generated_game(GeneratorKind::size_uniform, 4, 3, 8);
    for (int l = 0; l < 3; ++l)
        for (int s = 2; s <= 4; ++s)
            for (int i = 0; i < 4; ++i) {
                CHECK(g.mean(i, i, l, s) == 0.0);
                for (int j = 0; j < 4; ++j) CHECK(g.mean(i, j, l, s) == g.mean(j, i, l, s));
            }
}

TEST_CASE("mixed-effects game")
{
    auto g = builtin_game("H-mixed(4)").game;
    CHECK(g.k() == 5);
    for (int i = 0; i < 4; ++i) CHECK(g.actions(i) == std::vector<Mask>{0b00011, 0b10101, 0b11000});
    // Coalitions 2 and 4 carry mu - 1 at every size.
    const double costly = simpson_clamped_mean(-1.0, 1.0);
    for (int s = 2; s <= 4; ++s) {
        CHECK(g.mean(0, 1, 1, s) == doctest::Approx(costly).epsilon(1e-9));
        CHECK(g.mean(0, 1, 3, s) == doctest::Approx(costly).epsilon(1e-9));
        CHECK(g.mean(0, 1, 2, s) == doctest::Approx(0.0).scale(1.0));
        CHECK(g.mean(0, 1, 0, s) == doctest::Approx(simpson_clamped_mean(-s / 5.0, 1.0)).epsilon(1e-9));
        CHECK(g.mean(0, 1, 4, s) == doctest::Approx(simpson_clamped_mean(s / 5.0, 1.0)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(make_generated_game(GeneratorKind::mixed_effects, 3, 4, 0), Error);
}

TEST_CASE("mixed-effects shocks are shared by all pairs of a record")
{
    auto g = builtin_game("H-mixed(4)").game;
    Rng rng(6);
    JointAction a{std::vector<Mask>(4, 0b10101)};
    auto tab = sample_utilities(g, a, rng);
    // Every pair in coalition 3 sees the same draw.
    double first = std::nan("");
    for (std::size_t s = 0; s < tab.slots.size(); ++s)
        if (tab.slots[s].l == 2) {
            if (std::isnan(first)) first = tab.values[s];
            CHECK(tab.values[s] == first);
        }
}

TEST_CASE("builtin tables")
{
    auto g1 = builtin_game("D-G1").game;
    CHECK(g1.mean(0, 1, 0, 2) == 1.0);
    CHECK(g1.mean(0, 1, 0, 3) == -1.0);
    CHECK(g1.mean(0, 1, 1, 6) == doctest::Approx(-0.1));
    auto g2 = builtin_game("D-G2").game;
    CHECK(g2.mean(0, 1, 0, 6) == -1.0);
    CHECK(g2.mean(0, 1, 0, 3) == 1.0);
    CHECK(builtin_game("F-G1").policy->support().size() == 10);
    CHECK(builtin_game("D-G2").policy->support().size() == 36);
    CHECK_FALSE(builtin_game("H-mixed(3)").policy.has_value());
    CHECK_THROWS_AS(builtin_game("D-G3"), Error);
    CHECK(is_builtin_name("H-mixed(12)"));
    CHECK_FALSE(is_builtin_name("H-mixed()"));
}

TEST_CASE("generator names round-trip")
{
    for (auto kind : {GeneratorKind::uniform, GeneratorKind::gaussian, GeneratorKind::size_uniform,
                      GeneratorKind::size_gaussian, GeneratorKind::mixed_effects})
        CHECK(parse_generator(to_string(kind)) == kind);
    CHECK_THROWS_AS(parse_generator("poisson"), Error);
}
