#include "pocf/builtins.hpp"

#include <regex>

#include "pocf/models.hpp"

namespace pocf {

namespace {

constexpr Mask c1 = 0b001, c2 = 0b010, c3 = 0b100;

std::vector<std::vector<double>> d_table(bool second)
{
    // Size 0 and 1 entries are never read.
    std::vector<double> l1 = second ? std::vector<double>{0, 0, 1, 1, 1, 1, -1}
                                    : std::vector<double>{0, 0, 1, -1, 1, 1, 1};
    std::vector<double> l2{0, 0, -1.0 / 2, -1.0 / 4, -1.0 / 6, -1.0 / 8, -1.0 / 10};
    return {l1, l2};
}

std::vector<std::vector<double>> f_table(bool second)
{
    if (second) return {{0, 0, 1, -0.25}, {0, 0, 1, -0.25}, {0, 0, -0.5, -0.25}};
    return {{0, 0, 1, 0.5}, {0, 0, 1, -1}, {0, 0, -0.5, -0.25}};
}

GameSpec d_game(bool second)
{
    std::vector<std::vector<Mask>> sets(6, {c1, c2});
    return GameSpec(6, 2, sets, std::make_shared<SizeTableModel>(d_table(second)), second ? "D-G2" : "D-G1");
}

GameSpec f_game(bool second)
{
    std::vector<std::vector<Mask>> sets(3, {c1, c2, c3, c1 | c2});
    return GameSpec(3, 3, sets, std::make_shared<SizeTableModel>(f_table(second)), second ? "F-G2" : "F-G1");
}

int parse_mixed_n(const std::string& name)
{
    static const std::regex re(R"(H-mixed\((\d+)\))");
    std::smatch m;
    if (!std::regex_match(name, m, re)) return -1;
    return std::stoi(m[1].str());
}

} // namespace

bool is_builtin_name(const std::string& name)
{
    return name == "D-G1" || name == "D-G2" || name == "F-G1" || name == "F-G2" || parse_mixed_n(name) >= 1;
}

std::vector<std::string> builtin_names() { return {"D-G1", "D-G2", "F-G1", "F-G2", "H-mixed(n)"}; }

Policy d_policy(const GameSpec& g)
{
    std::vector<std::pair<JointAction, double>> table;
    for (unsigned bits = 0; bits < 64; ++bits) {
        const int s = __builtin_popcount(bits);
        if (s != 2 && s != 4 && s != 5) continue;
        JointAction a;
        for (int i = 0; i < 6; ++i) a.actions.push_back((bits >> i) & 1 ? c1 : c2);
        table.emplace_back(std::move(a), 1.0 / 36.0);
    }
    return Policy::explicit_table(g, std::move(table), "builtin:D");
}

Policy f_policy(const GameSpec& g)
{
    const Mask both = c1 | c2;
    std::vector<JointAction> support{{{both, both, both}}};
    for (int odd = 0; odd < 3; ++odd) {
        JointAction a{{both, both, both}};
        a.actions[odd] = c3;
        support.push_back(a);
        for (Mask single : {c1, c2}) {
            JointAction b{{c3, c3, c3}};
            b.actions[odd] = single;
            support.push_back(b);
        }
    }
    std::vector<std::pair<JointAction, double>> table;
    for (auto& a : support) table.emplace_back(a, 0.1);
    return Policy::explicit_table(g, std::move(table), "builtin:F");
}

Builtin builtin_game(const std::string& name)
{
    if (name == "D-G1" || name == "D-G2") {
        GameSpec g = d_game(name == "D-G2");
        return {g, d_policy(g)};
    }
    if (name == "F-G1" || name == "F-G2") {
        GameSpec g = f_game(name == "F-G2");
        return {g, f_policy(g)};
    }
    if (const int n = parse_mixed_n(name); n >= 1)
        return {make_generated_game(GeneratorKind::mixed_effects, n, 5, 0), std::nullopt};
    throw Error("unknown builtin game '" + name + "' (expected D-G1, D-G2, F-G1, F-G2 or H-mixed(n))");
}

} // namespace pocf
