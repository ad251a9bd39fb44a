#pragma once
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace pocf {

using Mask = std::uint64_t;
using Rng = std::mt19937_64;

inline constexpr double kNsTol = 1e-9;
inline constexpr std::uint64_t kEnumBudget = 100000;
inline constexpr int kMaxCoalitions = 64;

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Raised when exact enumeration would exceed the budget.
class BudgetExceeded : public Error
{
public:
    using Error::Error;
};

// Raised when a dataset carries the wrong feedback kind for an estimator.
class FeedbackMismatch : public Error
{
public:
    using Error::Error;
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derived stream seed; independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ (c + 0x85157af5ULL));
    return h;
}

inline int popcount(Mask m) { return __builtin_popcountll(m); }
inline bool has(Mask m, int l) { return (m >> l) & 1ULL; }

// Uniform double in [0,1) built from 53 random bits; stable across standard libraries.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace pocf
