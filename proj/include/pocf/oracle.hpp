#pragma once
#include <string>
#include <vector>

#include "pocf/game.hpp"

namespace pocf {

struct Improvement
{
    int agent = -1;
    int action = -1;   // index into the agent's action set
    double gain = 0.0; // d_i(a_-i, a_i') - d_i(a)
};

// Best pure deviation of agent i at a (ties to the lowest index).
Improvement best_response(const GameSpec& g, const JointAction& a, int i);
bool is_pure_ns(const GameSpec& g, const JointAction& a, double tol = kNsTol);

// All pure NS joint actions, lexicographically sorted.
std::vector<JointAction> enumerate_pure_ns(const GameSpec& g);

namespace serial {
std::vector<JointAction> enumerate_pure_ns(const GameSpec& g);
} // namespace serial

struct DynamicsResult
{
    JointAction profile;
    std::int64_t steps = 0;
    std::vector<double> potential; // Phi after each step, starting with Phi(start)
    bool identity_checked = false;  // per-step Phi check ran (size-independent means only)
};

// Random improving agent, then its best pure response, until no agent improves by more than kNsTol.
// On size-independent games each step asserts that Phi rises by exactly the mover's gain; with
// size-dependent means Phi is not an exact potential and only the step guard applies.
DynamicsResult better_response_dynamics(const GameSpec& g, const JointAction& start, Rng& rng);

struct CertClause
{
    std::string description;
    bool pass = false;
    std::string detail;
};

struct CertReport
{
    std::string name;
    std::vector<JointAction> ns;
    std::vector<CertClause> clauses;
    bool pass = false;
};

// Re-derives the pure NS set of a builtin and checks it clause by clause against its
// closed-form characterization.
CertReport verify_builtin(const std::string& name);

} // namespace pocf
