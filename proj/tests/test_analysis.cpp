#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "pwc/analysis.hpp"

using namespace pwc;

namespace {

// Independent route: scan u upward until 2^u clears the ceiling.
unsigned scan_min_u(std::uint64_t eps, std::uint64_t dmin) {
    const std::uint64_t ratio = (eps + dmin - 1) / dmin;
    for (unsigned u = 1;; ++u) {
        if ((static_cast<unsigned __int128>(1) << u) > ratio) return u;
    }
}

}  // namespace

TEST_CASE("theorem1_min_u") {
    CHECK(theorem1_min_u(10000, 1, 5, 9) == 14);
    CHECK(theorem1_min_u(7, 1, 2, 3) == 3);   // 2^3 = 8 > 7
    CHECK(theorem1_min_u(1, 1, 1, 1) == 1);   // eps <= min delta
    CHECK(theorem1_min_u(5, 7, 9, 11) == 1);
    CHECK_THROWS_AS(theorem1_min_u(0, 1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(theorem1_min_u(5, 0, 1, 1), std::invalid_argument);

    for (std::uint64_t eps : {1ull, 2ull, 7ull, 8ull, 100ull, 6250ull, 400000ull}) {
        for (std::uint64_t d : {1ull, 2ull, 3ull, 12ull, 13ull}) {
            CHECK(theorem1_min_u(eps, d, d + 1, d + 2) == scan_min_u(eps, d));
        }
    }
}

TEST_CASE("eq1_expected_u") {
    // 10 ms skew, 0.1 ms between events, 0.25 ms transit: 7 bits suffice.
    CHECK(eq1_expected_u(10000, 100, 250) == 7);
    CHECK(eq1_expected_u(50, 50, 50) == 1);
    CHECK(eq1_expected_u(10000, 10, 1e9) == 10);  // 2^10 = 1024 > 1000
    CHECK_THROWS_AS(eq1_expected_u(0, 1, 1), std::invalid_argument);
}

TEST_CASE("empirical_u evaluates the fitted formula as printed") {
    EmpiricalFormulaParams p;
    p.K = 2.9;
    p.S = 1;
    p.epsilon_ms = 6.25;
    p.delta_se_us = 1;
    p.delta_re_us = 1;
    // (log2(1000) + log2(6.25)/log2(2)) / 2.9 = (9.9658 + 2.6439)/2.9 = 4.348
    CHECK(empirical_u(p) == 5);

    p.epsilon_ms = 1;  // log2(1) = 0 kills the skew term
    CHECK(empirical_u(p) == 4);

    p.S = 64;
    p.epsilon_ms = 400;
    const double expect =
        std::ceil((std::log2(1000.0 * 64 * 64) + std::log2(400.0) / std::log2(65.0)) / 2.9);
    CHECK(empirical_u(p) == static_cast<unsigned>(expect));
    CHECK_THROWS_AS(empirical_u({2.9, 0, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("theorem3_bound") {
    CHECK(theorem3_bound(100, 3) == 116);
    CHECK(theorem3_bound(0, 1) == 4);
    CHECK(theorem3_bound(6250, 9) == 7274);
    CHECK_THROWS_AS(theorem3_bound(1, 63), std::overflow_error);
}

TEST_CASE("waitfree_u reads the histogram tail") {
    std::array<std::uint64_t, 16> hist{};
    hist[0] = 100;
    CHECK(waitfree_u(hist).raw == 0);
    CHECK(waitfree_u(hist).reported == 1);

    hist[9] = 142;  // tail event bucket
    CHECK(waitfree_u(hist).raw == 9);
    CHECK(waitfree_u(hist).reported == 9);

    std::array<std::uint64_t, 8> single{};
    single[4] = 1;
    CHECK(waitfree_u(single).raw == 4);

    std::array<std::uint64_t, 4> empty{};
    CHECK_THROWS_AS(waitfree_u(empty), std::invalid_argument);
    CHECK_THROWS_AS(waitfree_u(std::span<const std::uint64_t>{}), std::invalid_argument);
}

TEST_CASE("delayed_fraction") {
    std::array<std::uint64_t, 16> hist{};
    hist[0] = 100;
    CHECK(delayed_fraction(hist, 4) == 0.0);

    hist[0] = 90;
    hist[5] = 10;
    CHECK(delayed_fraction(hist, 4) == doctest::Approx(0.10));
    CHECK(delayed_fraction(hist, 5) == 0.0);  // u at the max index
    CHECK_THROWS_AS(delayed_fraction(hist, 0), std::invalid_argument);
}

TEST_CASE("formula monotonicity and ordering") {
    // Coarser denominators never need more bits.
    for (std::uint64_t eps : {100ull, 6250ull, 400000ull}) {
        for (double av : {50.0, 200.0, 1000.0}) {
            const unsigned t1 = theorem1_min_u(eps, 1, 1, 1);
            const unsigned e1 = eq1_expected_u(static_cast<double>(eps), av, av);
            CHECK(t1 >= e1);
        }
    }
    // Non-decreasing in epsilon.
    unsigned prev = 0;
    for (std::uint64_t eps = 1; eps < 1000000; eps *= 4) {
        const unsigned u = theorem1_min_u(eps, 3, 3, 3);
        CHECK(u >= prev);
        prev = u;
    }
    // Non-increasing in the denominator.
    prev = 64;
    for (std::uint64_t d = 1; d <= 64; d *= 2) {
        const unsigned u = theorem1_min_u(10000, d, d, d);
        CHECK(u <= prev);
        prev = u;
    }
}
