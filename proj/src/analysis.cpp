#include "pwc/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace pwc {

namespace {

// Smallest u >= 1 with 2^u > x.
unsigned smallest_u_above(std::uint64_t x) {
    return std::max(1u, static_cast<unsigned>(std::bit_width(x)));
}

}  // namespace

unsigned theorem1_min_u(Ticks epsilon_us, Ticks delta_loc_us, Ticks delta_se_us,
                        Ticks delta_re_us) {
    if (epsilon_us == 0 || delta_loc_us == 0 || delta_se_us == 0 || delta_re_us == 0) {
        throw std::invalid_argument("theorem1_min_u needs positive inputs");
    }
    const Ticks d = std::min({delta_loc_us, delta_se_us, delta_re_us});
    const std::uint64_t ratio = (epsilon_us + d - 1) / d;
    return smallest_u_above(ratio);
}

unsigned eq1_expected_u(double epsilon_us, double av_comp_us, double av_tr_us) {
    if (epsilon_us <= 0 || av_comp_us <= 0 || av_tr_us <= 0) {
        throw std::invalid_argument("eq1_expected_u needs positive inputs");
    }
    const double ratio = std::ceil(epsilon_us / std::min(av_comp_us, av_tr_us));
    return smallest_u_above(static_cast<std::uint64_t>(ratio));
}

unsigned empirical_u(const EmpiricalFormulaParams& p) {
    if (p.K <= 0 || p.S <= 0 || p.epsilon_ms <= 0 || p.delta_se_us <= 0 ||
        p.delta_re_us <= 0) {
        throw std::invalid_argument("empirical_u needs positive inputs");
    }
    const double dmin = std::min(p.delta_re_us, p.delta_se_us);
    const double rate_term = std::log2(1000.0 * p.S * p.S / dmin);
    const double skew_term = std::log2(p.epsilon_ms) / std::log2(p.S + 1.0);
    const double value = std::ceil((rate_term + skew_term) / p.K);
    return value < 1.0 ? 1u : static_cast<unsigned>(value);
}

Ticks theorem3_bound(Ticks epsilon_ticks, unsigned u) {
    if (u >= 63) {
        throw std::overflow_error("theorem3_bound: 2^(u+1) exceeds 64 bits");
    }
    const Ticks spread = Ticks{1} << (u + 1);
    if (epsilon_ticks > ~Ticks{0} - spread) {
        throw std::overflow_error("theorem3_bound overflow");
    }
    return epsilon_ticks + spread;
}

WaitfreeU waitfree_u(std::span<const std::uint64_t> hist) {
    if (hist.empty()) {
        throw std::invalid_argument("empty histogram");
    }
    unsigned raw = 0;
    bool any = false;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (hist[i] > 0) {
            raw = static_cast<unsigned>(i);
            any = true;
        }
    }
    if (!any) {
        throw std::invalid_argument("histogram has no events");
    }
    return WaitfreeU{raw, std::max(raw, 1u)};
}

double delayed_fraction(std::span<const std::uint64_t> hist, unsigned u) {
    if (u == 0) {
        throw std::invalid_argument("u must be positive");
    }
    std::uint64_t total = 0;
    std::uint64_t over = 0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        total += hist[i];
        if (i > u) over += hist[i];
    }
    if (total == 0) {
        throw std::invalid_argument("histogram has no events");
    }
    return static_cast<double>(over) / static_cast<double>(total);
}

}  // namespace pwc
