#include "pocf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "pocf/builtins.hpp"

namespace pocf {

namespace {

// d_i after agent i switches to `alt`; `sizes` belongs to `a` and is left unchanged.
double deviation_value(const GameSpec& g, std::vector<Mask>& a, std::vector<int>& sizes, int i, Mask alt)
{
    const Mask old = a[i];
    for (int l = 0; l < g.k(); ++l) sizes[l] += int(has(alt, l)) - int(has(old, l));
    a[i] = alt;
    const double v = mean_utility_raw(g, a.data(), sizes.data(), i);
    a[i] = old;
    for (int l = 0; l < g.k(); ++l) sizes[l] -= int(has(alt, l)) - int(has(old, l));
    return v;
}

bool ns_raw(const GameSpec& g, std::vector<Mask>& a, std::vector<int>& sizes, double tol)
{
    for (int i = 0; i < g.n(); ++i) {
        const double cur = mean_utility_raw(g, a.data(), sizes.data(), i);
        for (Mask alt : g.actions(i))
            if (alt != a[i] && deviation_value(g, a, sizes, i, alt) > cur + tol) return false;
    }
    return true;
}

void require_budget(const GameSpec& g)
{
    if (!g.enumerable())
        throw BudgetExceeded("joint action space exceeds the enumeration budget of " + std::to_string(kEnumBudget));
}

} // namespace

Improvement best_response(const GameSpec& g, const JointAction& a, int i)
{
    validate_action(g, a);
    std::vector<Mask> m = a.actions;
    auto sizes = coalition_sizes(g.k(), m.data(), g.n());
    const double cur = mean_utility_raw(g, m.data(), sizes.data(), i);
    Improvement best{i, g.index_of(i, a.actions[i]), 0.0};
    double best_v = cur;
    for (std::size_t q = 0; q < g.actions(i).size(); ++q) {
        const double v = deviation_value(g, m, sizes, i, g.actions(i)[q]);
        if (v > best_v + 1e-12) {
            best_v = v;
            best.action = static_cast<int>(q);
        }
    }
    best.gain = best_v - cur;
    return best;
}

bool is_pure_ns(const GameSpec& g, const JointAction& a, double tol)
{
    validate_action(g, a);
    std::vector<Mask> m = a.actions;
    auto sizes = coalition_sizes(g.k(), m.data(), g.n());
    return ns_raw(g, m, sizes, tol);
}

std::vector<JointAction> enumerate_pure_ns(const GameSpec& g)
{
    require_budget(g);
    const std::uint64_t total = g.joint_count();
    constexpr int kBlocks = 64;
    std::vector<std::vector<JointAction>> found(kBlocks);
#pragma omp parallel for schedule(dynamic) if (total >= 4096)
    for (int b = 0; b < kBlocks; ++b) {
        const std::uint64_t lo = total * b / kBlocks, hi = total * (b + 1) / kBlocks;
        std::vector<int> idx;
        for (std::uint64_t t = lo; t < hi; ++t) {
            decode_joint(g, t, idx);
            JointAction a = joint_from_indices(g, idx);
            auto sizes = coalition_sizes(g.k(), a.actions.data(), g.n());
            if (ns_raw(g, a.actions, sizes, kNsTol)) found[b].push_back(std::move(a));
        }
    }
    std::vector<JointAction> out;
    for (auto& f : found) out.insert(out.end(), f.begin(), f.end());
    std::sort(out.begin(), out.end());
    return out;
}

namespace serial {

std::vector<JointAction> enumerate_pure_ns(const GameSpec& g)
{
    require_budget(g);
    std::vector<JointAction> out;
    std::vector<int> idx;
    for (std::uint64_t t = 0; t < g.joint_count(); ++t) {
        decode_joint(g, t, idx);
        JointAction a = joint_from_indices(g, idx);
        if (is_pure_ns(g, a)) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace serial

DynamicsResult better_response_dynamics(const GameSpec& g, const JointAction& start, Rng& rng)
{
    validate_action(g, start);
    DynamicsResult r;
    r.profile = start;
    r.potential.push_back(potential(g, start));
    r.identity_checked = !g.size_dependent();
    const double joint = std::min<double>(static_cast<double>(g.joint_count()), 1e12);
    const double guard = joint * g.n() * 1e3;
    std::vector<Improvement> moves;
    while (true) {
        moves.clear();
        for (int i = 0; i < g.n(); ++i) {
            auto br = best_response(g, r.profile, i);
            if (br.gain > kNsTol) moves.push_back(br);
        }
        if (moves.empty()) break;
        if (static_cast<double>(r.steps) >= guard)
            throw Error("better-response dynamics exceeded its step guard; the potential argument is violated");
        const auto& mv = moves[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(moves.size()))];
        r.profile.actions[mv.agent] = g.actions(mv.agent)[mv.action];
        const double phi = potential(g, r.profile);
        const double rise = phi - r.potential.back();
        if (r.identity_checked && std::abs(rise - mv.gain) > 1e-9 * std::max(1.0, std::abs(mv.gain)))
            throw Error("potential rose by " + std::to_string(rise) + " but the mover gained " +
                        std::to_string(mv.gain));
        r.potential.push_back(phi);
        ++r.steps;
    }
    return r;
}

namespace {

int size_of(const JointAction& a, int l)
{
    int s = 0;
    for (Mask m : a.actions) s += has(m, l);
    return s;
}

// Two agents play `pair`, the remaining one plays `odd`.
bool two_and_one(const JointAction& a, Mask pair, Mask odd)
{
    int np = 0, no = 0;
    for (Mask m : a.actions) {
        np += m == pair;
        no += m == odd;
    }
    return np == 2 && no == 1;
}

std::string list_profiles(const std::vector<JointAction>& v, std::size_t cap = 6)
{
    std::ostringstream os;
    for (std::size_t t = 0; t < v.size() && t < cap; ++t) os << (t ? " " : "") << format_joint(v[t]);
    if (v.size() > cap) os << " ... (" << v.size() << " total)";
    return os.str();
}

using Family = std::function<bool(const JointAction&)>;

// Member of `fam` that is not NS, and NS profiles outside every family.
void family_clauses(const GameSpec& g, const std::vector<JointAction>& ns, const std::vector<std::string>& names,
                    const std::vector<Family>& fams, CertReport& rep)
{
    std::vector<int> idx;
    for (std::size_t f = 0; f < fams.size(); ++f) {
        std::vector<JointAction> members, unstable;
        for (std::uint64_t t = 0; t < g.joint_count(); ++t) {
            decode_joint(g, t, idx);
            JointAction a = joint_from_indices(g, idx);
            if (!fams[f](a)) continue;
            members.push_back(a);
            if (!std::binary_search(ns.begin(), ns.end(), a)) unstable.push_back(a);
        }
        std::sort(unstable.begin(), unstable.end());
        CertClause c;
        c.description = "every profile with " + names[f] + " is Nash stable";
        c.pass = !members.empty() && unstable.empty();
        c.detail = std::to_string(members.size()) + " profiles";
        if (members.empty()) c.detail += "; the family is empty";
        if (!unstable.empty()) c.detail += "; not stable: " + list_profiles(unstable);
        rep.clauses.push_back(c);
    }
    std::vector<JointAction> extra;
    for (const auto& a : ns)
        if (std::none_of(fams.begin(), fams.end(), [&](const Family& f) { return f(a); })) extra.push_back(a);
    CertClause c;
    c.description = "no other pure profile is Nash stable";
    c.pass = extra.empty();
    c.detail = std::to_string(ns.size()) + " stable profiles";
    if (!extra.empty()) c.detail += "; outside the characterization: " + list_profiles(extra);
    rep.clauses.push_back(c);
}

} // namespace

CertReport verify_builtin(const std::string& name)
{
    const GameSpec g = builtin_game(name).game;
    CertReport rep;
    rep.name = name;
    rep.ns = enumerate_pure_ns(g);
    constexpr Mask c1 = 0b001, c2 = 0b010, c3 = 0b100;
    if (name == "D-G1") {
        family_clauses(g, rep.ns, {"|C_1| = 2", "|C_1| = 6"},
                       {[](const JointAction& a) { return size_of(a, 0) == 2; },
                        [](const JointAction& a) { return size_of(a, 0) == 6; }},
                       rep);
    } else if (name == "D-G2") {
        family_clauses(g, rep.ns, {"|C_1| = 5"}, {[](const JointAction& a) { return size_of(a, 0) == 5; }}, rep);
    } else if (name == "F-G1") {
        family_clauses(g, rep.ns, {"two agents on {1,2} and one on {1}", "two agents on {2} and one on {3}"},
                       {[](const JointAction& a) { return two_and_one(a, c1 | c2, c1); },
                        [](const JointAction& a) { return two_and_one(a, c2, c3); }},
                       rep);
    } else if (name == "F-G2") {
        family_clauses(g, rep.ns, {"|C_1| = |C_2| = 2", "two agents on one singleton {1} or {2} and one on {3}"},
                       {[](const JointAction& a) { return size_of(a, 0) == 2 && size_of(a, 1) == 2; },
                        [](const JointAction& a) { return two_and_one(a, c1, c3) || two_and_one(a, c2, c3); }},
                       rep);
    } else {
        const Mask target = 0b10101;
        family_clauses(g, rep.ns, {"every agent on {1,3,5}"},
                       {[&](const JointAction& a) {
                           return std::all_of(a.actions.begin(), a.actions.end(),
                                              [&](Mask m) { return m == target; });
                       }},
                       rep);
    }
    rep.pass = std::all_of(rep.clauses.begin(), rep.clauses.end(), [](const CertClause& c) { return c.pass; });
    return rep;
}

} // namespace pocf
