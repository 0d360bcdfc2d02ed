#pragma once

#include <cstdint>
#include <span>

#include "pwc/clock.hpp"

namespace pwc {

// Smallest u with 2^u > ceil(eps / min(delta_loc, delta_se, delta_re)).
// The sufficient condition for wait-free viability.
unsigned theorem1_min_u(Ticks epsilon_us, Ticks delta_loc_us, Ticks delta_se_us,
                        Ticks delta_re_us);

// Same shape with average inter-event and transit times instead of minima:
// the "expected to work" estimate.
unsigned eq1_expected_u(double epsilon_us, double av_comp_us, double av_tr_us);

// Fitted formula from the simulation study. Units are exactly as published:
// S in messages/node/millisecond, epsilon in milliseconds, deltas in
// microseconds, K dimensionless (2.9 +- 0.1).
struct EmpiricalFormulaParams {
    double K = 2.9;
    double S = 1.0;
    double epsilon_ms = 6.25;
    double delta_se_us = 1.0;
    double delta_re_us = 1.0;
};

unsigned empirical_u(const EmpiricalFormulaParams& p);

// Worst-case pairwise clock spread: eps + 2^(u+1).
Ticks theorem3_bound(Ticks epsilon_ticks, unsigned u);

struct WaitfreeU {
    unsigned raw;       // max histogram index with a nonzero count
    unsigned reported;  // max(raw, 1); u must stay positive
};

WaitfreeU waitfree_u(std::span<const std::uint64_t> bits_histogram);

// Fraction of events whose lpt width exceeds u: the first-order estimate of
// how many messages a Wait policy at that u would delay.
double delayed_fraction(std::span<const std::uint64_t> bits_histogram, unsigned u);

}  // namespace pwc
