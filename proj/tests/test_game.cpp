#include "doctest.h"

#include "pocf/builtins.hpp"
#include "test_util.hpp"

using namespace pocf;
using namespace testutil;

TEST_CASE("induce_partition follows membership")
{
    auto g = zero_game(3, 2, {C1, C2, C1 | C2});
    auto p = induce_partition(g, {{C1, C1 | C2, C2}});
    CHECK(p.coalitions[0] == std::vector<int>{0, 1});
    CHECK(p.coalitions[1] == std::vector<int>{1, 2});
    CHECK(p.nonempty() == 2);

    auto d = builtin_game("D-G1").game;
    auto grand = induce_partition(d, d_profile({0, 1, 2, 3, 4, 5}));
    CHECK(grand.coalitions[0].size() == 6);
    CHECK(grand.coalitions[1].empty());
    CHECK(grand.nonempty() == 1);

    auto two = induce_partition(d, d_profile({1, 4}));
    CHECK(two.coalitions[0].size() == 2);
    CHECK(two.coalitions[1].size() == 4);
}

TEST_CASE("invalid actions are rejected with the agent id")
{
    auto g = zero_game(3, 2, {C1, C2});
    try {
        validate_action(g, {{C1, C1 | C2, C2}});
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("agent 2") != std::string::npos);
    }
    CHECK_THROWS_AS(induce_partition(g, {{C1, C2}}), Error);
}

TEST_CASE("mean utility on the D games")
{
    auto g = builtin_game("D-G1").game;
    auto a = d_profile({0, 3});
    CHECK(mean_utility(g, a, 0) == 1.0);
    CHECK(mean_utility(g, a, 3) == 1.0);
    CHECK(mean_utility(g, a, 1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(mean_utility(g, d_profile({0, 1, 2, 3, 4, 5}), 2) == 5.0);

    auto z = zero_game(4, 3, power_set(3));
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        auto b = random_joint(z, rng);
        for (int i = 0; i < 4; ++i) CHECK(mean_utility(z, b, i) == 0.0);
    }
}

TEST_CASE("mean utility matches the definition on random games")
{
    Rng rng(11);
    for (auto kind : {GeneratorKind::uniform, GeneratorKind::gaussian, GeneratorKind::size_uniform,
                      GeneratorKind::size_gaussian}) {
        auto g = make_generated_game(kind, 5, 3, 100 + static_cast<int>(kind));
        for (int t = 0; t < 30; ++t) {
            auto a = random_joint(g, rng);
            for (int i = 0; i < 5; ++i) CHECK(mean_utility(g, a, i) == doctest::Approx(naive_utility(g, a, i)).epsilon(1e-13));
        }
    }
}

TEST_CASE("potential values")
{
    auto g = builtin_game("D-G1").game;
    CHECK(potential(g, d_profile({2, 5})) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(potential(g, d_profile({0, 1, 2, 3, 4, 5})) == 15.0);
    CHECK(potential(zero_game(3, 2, {C1, C2}), {{C1, C1, C2}}) == 0.0);
}

TEST_CASE("potential identity for unilateral deviations")
{
    Rng rng(3);
    for (int gi = 0; gi < 20; ++gi) {
        const auto kind = gi % 2 ? GeneratorKind::uniform : GeneratorKind::gaussian;
        const int n = 2 + gi % 5;
        const int k = 1 + gi % 4;
        auto g = gi % 3 ? make_generated_game(kind, n, k, 500 + gi) : random_explicit_game(n, k, 500 + gi, power_set(k));
        for (int t = 0; t < 20; ++t) {
            auto a = random_joint(g, rng);
            const int i = static_cast<int>(rng() % n);
            auto b = a;
            b.actions[i] = g.actions(i)[rng() % g.actions(i).size()];
            const double lhs = potential(g, a) - potential(g, b);
            const double rhs = mean_utility(g, a, i) - mean_utility(g, b, i);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("half the utility sum is not a potential once means depend on size")
{
    // D-G1: agent 3 moves from C_2 (size 4) into C_1 = {1,2}.
    auto g = builtin_game("D-G1").game;
    auto a = d_profile({0, 1});
    auto b = d_profile({0, 1, 2});
    CHECK(mean_utility(g, b, 2) - mean_utility(g, a, 2) == doctest::Approx(-2.0 + 0.5));
    // Phi(a) = (1 + 1 + 4 * 3 * (-1/6)) / 2 = 0, Phi(b) = (3 * 2 * (-1) + 3 * 2 * (-1/4)) / 2 = -3.75.
    CHECK(potential(g, a) == doctest::Approx(0.0).scale(1.0));
    CHECK(potential(g, b) == doctest::Approx(-3.75));
}

TEST_CASE("sample_utilities")
{
    SUBCASE("deterministic law returns the means")
    {
        auto g = builtin_game("F-G1").game;
        Rng rng(1);
        JointAction a{{C1 | C2, C1 | C2, C1}};
        auto t = sample_utilities(g, a, rng);
        for (std::size_t s = 0; s < t.slots.size(); ++s) {
            const auto& sl = t.slots[s];
            auto sizes = coalition_sizes(3, a.actions.data(), 3);
            CHECK(t.values[s] == g.mean(sl.i, sl.j, sl.l, sizes[sl.l]));
        }
        CHECK(t.totals(3)[2] == mean_utility(g, a, 2));
    }
    SUBCASE("clamped gaussian stays in range")
    {
        auto g = make_generated_game(GeneratorKind::gaussian, 4, 2, 9, {}, std::vector<std::vector<Mask>>(4, {C1 | C2}));
        Rng rng(2);
        JointAction a{{C1 | C2, C1 | C2, C1 | C2, C1 | C2}};
        bool inside = true;
        for (int t = 0; t < 10000; ++t)
            for (double v : sample_utilities(g, a, rng).values) inside = inside && v >= -1.0 && v <= 1.0;
        CHECK(inside);
    }
    SUBCASE("seeded draws repeat")
    {
        auto g = make_generated_game(GeneratorKind::size_uniform, 4, 3, 5);
        Rng r1(42), r2(42);
        Rng pick(0);
        auto a = random_joint(g, pick);
        CHECK(sample_utilities(g, a, r1).values == sample_utilities(g, a, r2).values);
    }
    SUBCASE("table is symmetric and zero off coalition")
    {
        auto g = make_generated_game(GeneratorKind::uniform, 4, 2, 5, {}, std::vector<std::vector<Mask>>(4, {C1, C1 | C2}));
        Rng rng(5);
        auto t = sample_utilities(g, {{C1 | C2, C1, C1 | C2, C1}}, rng);
        CHECK(t.value(0, 2, 1) == t.value(2, 0, 1));
        CHECK(t.value(0, 1, 1) == 0.0);
        CHECK(t.value(1, 1, 0) == 0.0);
    }
}

TEST_CASE("expected utility")
{
    auto g = builtin_game("D-G2").game;
    auto a = d_profile({0, 1, 2, 3, 4});
    for (int i = 0; i < 6; ++i)
        CHECK(expected_utility(g, MixedProfile::point(g, a), i, EvalMode::exact_mode()).value == mean_utility(g, a, i));

    // Two agents, singleton actions, mean 1 exactly when they share a coalition.
    std::vector<std::vector<std::vector<double>>> t(2, {{0, 1}, {1, 0}});
    GameSpec two(2, 2, {{C1, C2}, {C1, C2}}, std::make_shared<ExplicitModel>(t));
    CHECK(expected_utility(two, MixedProfile::uniform(two), 0, EvalMode::exact_mode()).value == doctest::Approx(0.5));

    auto z = zero_game(4, 3, singletons(3));
    CHECK(expected_utility(z, MixedProfile::uniform(z), 1, EvalMode::exact_mode()).value == 0.0);
}

TEST_CASE("expected utility refuses exact mode beyond the budget")
{
    auto g = zero_game(9, 4, power_set(4)); // 15^9 joint actions
    CHECK_THROWS_AS(expected_utility(g, MixedProfile::uniform(g), 0, EvalMode::exact_mode()), BudgetExceeded);
    auto mc = expected_utility(g, MixedProfile::uniform(g), 0, EvalMode::monte_carlo(20, 1));
    CHECK(mc.value == 0.0);
}

TEST_CASE("expected utility agrees with a brute-force sum")
{
    Rng rng(21);
    auto g = make_generated_game(GeneratorKind::size_gaussian, 4, 3, 77);
    auto joints = all_joint(g);
    for (int t = 0; t < 5; ++t) {
        auto phi = random_profile(g, rng);
        for (int i = 0; i < 4; ++i) {
            double ref = 0.0;
            for (const auto& a : joints) ref += joint_prob(phi, g, a) * naive_utility(g, a, i);
            CHECK(expected_utility(g, phi, i, EvalMode::exact_mode()).value == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("Monte Carlo expected utility lies within 3 standard errors")
{
    Rng rng(8);
    int inside = 0, total = 0;
    for (int t = 0; t < 10; ++t) {
        auto g = make_generated_game(GeneratorKind::uniform, 4, 3, 300 + t);
        auto phi = random_profile(g, rng);
        for (int i = 0; i < 4; ++i) {
            const double ex = expected_utility(g, phi, i, EvalMode::exact_mode()).value;
            auto mc = expected_utility(g, phi, i, EvalMode::monte_carlo(4000, 1000 + t));
            inside += std::abs(mc.value - ex) <= 3.0 * mc.std_err + 1e-12;
            ++total;
        }
    }
    // 3 SE covers ~99.7%; allow one miss in 40.
    CHECK(inside >= total - 1);
}

TEST_CASE("duality gap examples")
{
    auto g = builtin_game("D-G1").game;
    auto r = exact_duality_gap(g, MixedProfile::point(g, d_profile({0, 1, 2, 3, 4})), EvalMode::exact_mode());
    CHECK(r.gap == doctest::Approx(5.0));
    CHECK(r.agent == 5);
    CHECK(g.actions(5)[r.deviation] == C1);

    auto z = zero_game(3, 3, power_set(3));
    Rng rng(4);
    for (int t = 0; t < 10; ++t) CHECK(exact_duality_gap(z, random_profile(z, rng), EvalMode::exact_mode()).gap == 0.0);
}

TEST_CASE("uniform singleton profile has zero gap when means ignore the coalition")
{
    // Every agent values a partner the same in every coalition, so every singleton is equally good.
    const int n = 4, k = 3;
    Rng rng(12);
    std::vector<std::vector<double>> base(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) base[i][j] = base[j][i] = 2.0 * uniform01(rng) - 1.0;
    std::vector<std::vector<std::vector<double>>> t(k, base);
    GameSpec g(n, k, std::vector<std::vector<Mask>>(n, singletons(k)), std::make_shared<ExplicitModel>(t));
    CHECK(exact_duality_gap(g, MixedProfile::uniform(g), EvalMode::exact_mode()).gap == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("best deviation is attained at a pure action")
{
    Rng rng(31);
    auto g = make_generated_game(GeneratorKind::gaussian, 4, 3, 55);
    auto phi = random_profile(g, rng);
    auto r = exact_duality_gap(g, phi, EvalMode::exact_mode());
    for (int i = 0; i < 4; ++i) {
        for (int t = 0; t < 100; ++t) {
            auto psi = phi;
            psi.probs[i] = random_profile(g, rng).probs[i];
            CHECK(expected_utility(g, psi, i, EvalMode::exact_mode()).value <= r.best[i] + 1e-12);
        }
        CHECK(r.local[i] >= -1e-12);
    }
}

TEST_CASE("mixed potential identity")
{
    Rng rng(41);
    auto g = make_generated_game(GeneratorKind::uniform, 3, 3, 66);
    auto mixed_phi = [&](const MixedProfile& p) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += expected_utility(g, p, i, EvalMode::exact_mode()).value;
        return 0.5 * s;
    };
    for (int t = 0; t < 10; ++t) {
        auto phi = random_profile(g, rng);
        const int i = t % 3;
        auto psi = phi;
        psi.probs[i] = random_profile(g, rng).probs[i];
        const double lhs = mixed_phi(phi) - mixed_phi(psi);
        const double rhs = expected_utility(g, phi, i, EvalMode::exact_mode()).value -
                           expected_utility(g, psi, i, EvalMode::exact_mode()).value;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("parallel deviation rows match the serial reference")
{
    Rng rng(51);
    auto g = make_generated_game(GeneratorKind::uniform, 6, 3, 88, {{"action_set_size", 5}});
    auto phi = random_profile(g, rng);
    AgentPayoff d = [&g](const Mask* a, int i) {
        auto s = coalition_sizes(g.k(), a, g.n());
        return mean_utility_raw(g, a, s.data(), i);
    };
    for (int i = 0; i < 6; ++i) {
        auto par = deviation_row(g, phi, i, d, EvalMode::exact_mode());
        auto ser = serial::deviation_row(g, phi, i, d);
        for (std::size_t q = 0; q < par.value.size(); ++q) CHECK(par.value[q] == doctest::Approx(ser.value[q]).epsilon(1e-12));
    }
}

TEST_CASE("mixed profiles validate")
{
    auto g = zero_game(2, 2, {C1, C2});
    MixedProfile bad{{{0.5, 0.6}, {1.0, 0.0}}};
    CHECK_THROWS_AS(bad.validate(g), Error);
    MixedProfile neg{{{1.5, -0.5}, {1.0, 0.0}}};
    CHECK_THROWS_AS(neg.validate(g), Error);
    CHECK(MixedProfile::point(g, {{C2, C1}}).is_pure());
    CHECK_FALSE(MixedProfile::uniform(g).is_pure());
}
