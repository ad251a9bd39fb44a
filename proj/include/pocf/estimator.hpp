#pragma once
#include "pocf/game.hpp"

namespace pocf {

// Utility estimate with an exploration bonus, queried at pure joint actions.
class Estimator
{
public:
    virtual ~Estimator() = default;
    virtual int n() const = 0;
    virtual int k() const = 0;
    virtual double estimate(const Mask* a, int i) const = 0;
    virtual double bonus(const Mask* a, int i) const = 0;

    double ucb(const Mask* a, int i) const { return estimate(a, i) + bonus(a, i); }
    double lcb(const Mask* a, int i) const { return estimate(a, i) - bonus(a, i); }
};

// True means with a constant per-agent bonus; the exact-estimator baseline.
class OracleEstimator : public Estimator
{
public:
    explicit OracleEstimator(const GameSpec& g, double bonus = 0.0) : g_(g), b_(bonus) {}
    int n() const override { return g_.n(); }
    int k() const override { return g_.k(); }
    double estimate(const Mask* a, int i) const override;
    double bonus(const Mask*, int) const override { return b_; }

private:
    const GameSpec& g_;
    double b_;
};

} // namespace pocf
