#pragma once
#include <cmath>
#include <memory>
#include <vector>

#include "pocf/game.hpp"
#include "pocf/models.hpp"

namespace testutil {

using namespace pocf;

inline constexpr Mask C1 = 0b001, C2 = 0b010, C3 = 0b100;

inline std::vector<Mask> singletons(int k)
{
    std::vector<Mask> s;
    for (int l = 0; l < k; ++l) s.push_back(Mask{1} << l);
    return s;
}

inline std::vector<Mask> power_set(int k)
{
    std::vector<Mask> s;
    for (Mask m = 1; m < (Mask{1} << k); ++m) s.push_back(m);
    return s;
}

// Symmetric deterministic means drawn uniformly from [-1,1].
inline GameSpec random_explicit_game(int n, int k, std::uint64_t seed, std::vector<Mask> actions)
{
    Rng rng(seed);
    std::vector<std::vector<std::vector<double>>> t(k, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) t[l][i][j] = t[l][j][i] = 2.0 * uniform01(rng) - 1.0;
    return GameSpec(n, k, std::vector<std::vector<Mask>>(n, actions), std::make_shared<ExplicitModel>(t));
}

inline GameSpec zero_game(int n, int k, std::vector<Mask> actions)
{
    std::vector<std::vector<std::vector<double>>> t(k, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    return GameSpec(n, k, std::vector<std::vector<Mask>>(n, actions), std::make_shared<ExplicitModel>(t));
}

// d_i(a) straight from the definition, on the model rather than the tabulated means.
inline double naive_utility(const GameSpec& g, const JointAction& a, int i)
{
    double d = 0.0;
    for (int l = 0; l < g.k(); ++l) {
        if (!has(a.actions[i], l)) continue;
        int size = 0;
        for (int j = 0; j < g.n(); ++j) size += has(a.actions[j], l);
        for (int j = 0; j < g.n(); ++j)
            if (j != i && has(a.actions[j], l)) d += g.model().mean(i, j, l, size);
    }
    return d;
}

inline JointAction random_joint(const GameSpec& g, Rng& rng)
{
    JointAction a;
    for (int i = 0; i < g.n(); ++i) a.actions.push_back(g.actions(i)[rng() % g.actions(i).size()]);
    return a;
}

inline MixedProfile random_profile(const GameSpec& g, Rng& rng)
{
    MixedProfile phi;
    for (int i = 0; i < g.n(); ++i) {
        std::vector<double> p(g.actions(i).size());
        double s = 0.0;
        for (auto& x : p) s += (x = -std::log(1.0 - uniform01(rng)));
        for (auto& x : p) x /= s;
        phi.probs.push_back(p);
    }
    return phi;
}

// Every joint action of an enumerable game, in mixed-radix order.
inline std::vector<JointAction> all_joint(const GameSpec& g)
{
    std::vector<JointAction> out;
    std::vector<int> idx;
    for (std::uint64_t c = 0; c < g.joint_count(); ++c) {
        decode_joint(g, c, idx);
        out.push_back(joint_from_indices(g, idx));
    }
    return out;
}

inline double joint_prob(const MixedProfile& phi, const GameSpec& g, const JointAction& a)
{
    double p = 1.0;
    for (int i = 0; i < g.n(); ++i) p *= phi.probs[i][g.index_of(i, a.actions[i])];
    return p;
}

// D games: agents in `in1` play {1}, the rest {2}.
inline JointAction d_profile(std::vector<int> in1)
{
    JointAction a{std::vector<Mask>(6, C2)};
    for (int i : in1) a.actions[i] = C1;
    return a;
}

} // namespace testutil
