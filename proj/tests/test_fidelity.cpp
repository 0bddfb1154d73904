#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qfid/fidelity.hpp"

using namespace qfid;
constexpr double kPi = std::numbers::pi;
constexpr auto kSym = ModelVariant::Symmetric;
constexpr auto kAnti = ModelVariant::Antisymmetric;

// frozen from the long double oracle (unfolded, textbook f)
constexpr double kFrozenNlfL1000 = 1442.1803221414897;

TEST(ModeFidelity, IdenticalStatesGiveOne) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> k(-kPi, kPi);
    const ModelParams p{kAnti, 0.4, -0.7, 8, {}};
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(mode_fidelity({k(rng), k(rng)}, p, p), 1.0);
}

TEST(ModeFidelity, OrthogonalOccupationsAreFlagged) {
    const ModelParams p1{kSym, -0.5, 0.0, 8, {}}, p2{kSym, 0.5, 0.0, 8, {}};
    // eps = 0 - mu: +0.5 vs -0.5
    try {
        mode_fidelity({kPi / 2, kPi / 2}, p1, p2);
        FAIL();
    } catch (const AccuracyError& e) {
        EXPECT_EQ(e.code(), "orthogonal-mode");
    }
}

TEST(ModeFidelity, NearIdenticalStatesAtZoneCenter) {
    const ModelParams p1{kSym, 0.0, 1.0, 8, {}}, p2{kSym, 0.002, 1.0, 8, {}};
    const double f = mode_fidelity({0, 0}, p1, p2);
    // textbook formula in long double
    const oracle::ld e1 = 2, e2 = 1.998L, g = 2;
    const oracle::ld want = 0.5L * (1 + (e1 * e2 + g * g) / (sqrtl(e1 * e1 + g * g) * sqrtl(e2 * e2 + g * g)));
    EXPECT_GT(f, 0.999);
    EXPECT_LT(f, 1.0);
    EXPECT_NEAR(f, static_cast<double>(want), 1e-16);
}

TEST(ModeFidelity, InUnitIntervalOnRandomPairs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> k(-kPi, kPi), mu(-3, 3), j(-2, 2);
    for (int i = 0; i < 20000; ++i) {
        const ModelParams a{kSym, mu(rng), j(rng), 8, {}}, b{kSym, mu(rng), j(rng), 8, {}};
        const double f = mode_fidelity({k(rng), k(rng)}, a, b);
        EXPECT_GT(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
}

TEST(NegLogFidelity, ZeroDeltaIsZero) {
    const CriticalNeighborhood nb{{0, 1}, path_mu(), 1.0, 0.0};
    const auto r = neg_log_fidelity(nb, kSym, 64);
    EXPECT_EQ(r.neg_log_f, 0.0);
    EXPECT_EQ(r.min_mode_f, 1.0);
    EXPECT_EQ(r.n_modes, 64 * 64);
}

TEST(NegLogFidelity, StateSwapSymmetry) {
    for (auto v : {kSym, kAnti}) {
        const CriticalNeighborhood nb{{0.3, 0.8}, path_mu(), 0.0, 2e-3};
        const double a = neg_log_fidelity(nb, v, 128).neg_log_f;
        const double b = neg_log_fidelity(nb.with_delta(-2e-3), v, 128).neg_log_f;
        EXPECT_NEAR(a, b, 1e-13 * a);
    }
    // at mu = 0 the particle-hole map makes every c symmetric too
    const CriticalNeighborhood nb{{0, 1}, path_mu(), 1.0, 1e-3};
    const double a = neg_log_fidelity(nb, kSym, 100).neg_log_f;
    EXPECT_NEAR(neg_log_fidelity(nb.with_delta(-1e-3), kSym, 100).neg_log_f, a, 1e-12 * a);
}

TEST(NegLogFidelity, FoldedMatchesUnfoldedOracle) {
    for (auto v : {kSym, kAnti})
        for (int l : {2, 4, 10, 32})
            for (auto bc : {BoundaryAssignment{}, BoundaryAssignment{Boundary::Antiperiodic, Boundary::Periodic}}) {
                const PhasePoint s1{0.3, 0.9}, s2{0.35, 0.7};
                const double got = neg_log_fidelity_states(v, s1, s2, l, bc).neg_log_f;
                const double want = static_cast<double>(oracle::neg_log_fidelity(
                    v == kSym, s1.mu, s1.j, s2.mu, s2.j, l));
                // swapping the axes is a relabelling of the same grid for these models
                EXPECT_NEAR(got, want, 1e-13 * want) << l;
            }
}

TEST(NegLogFidelity, RegressionFixtureAtL1000) {
    const CriticalNeighborhood nb{{0, 1}, path_mu(), 0.0, 1e-3};
    const auto r = neg_log_fidelity(nb, kSym, 1000);
    const double want = static_cast<double>(oracle::neg_log_fidelity(true, -1e-3L, 1.0L, 1e-3L, 1.0L, 1000));
    EXPECT_NEAR(r.neg_log_f, want, 1e-11 * want);
    EXPECT_NEAR(r.neg_log_f, kFrozenNlfL1000, 1e-11 * want);
    EXPECT_GT(r.min_mode_f, 0.0);
    EXPECT_LE(r.min_mode_f, 1.0);
}

TEST(NegLogFidelity, IndependentOfThreadCount) {
    const CriticalNeighborhood nb{{2, 0}, path_j(), 1.0, 1e-4};
    const double a = neg_log_fidelity(nb, kSym, 300, {}, 1).neg_log_f;
    for (int t : {2, 5}) EXPECT_EQ(neg_log_fidelity(nb, kSym, 300, {}, t).neg_log_f, a);
}

TEST(NegLogFidelity, NondecreasingInLAtSmallDelta) {
    const CriticalNeighborhood nb{{0, 1}, path_mu(), 0.0, 1e-6};
    double last = 0;
    for (int l = 8; l <= 200; l += 4) {
        const double y = neg_log_fidelity(nb, kSym, l).neg_log_f;
        EXPECT_GE(y, last) << l;
        last = y;
    }
}

TEST(NegLogFidelity, InvalidDirectionRejected) {
    const CriticalNeighborhood nb{{0, 1}, {1.0, 0.1}, 0.0, 1e-3};
    EXPECT_THROW(neg_log_fidelity(nb, kSym, 10), ValidationError);
}

TEST(PerSiteLimit, CoincidentStatesGiveZero) {
    EXPECT_EQ(neg_log_fidelity_per_site_limit(kSym, {0.5, 0.5}, {0.5, 0.5}), 0.0);
}

TEST(PerSiteLimit, MatchesExtrapolatedFiniteSums) {
    const PhasePoint a{2, 0.000999}, b{2, 0.001001};
    const double lim = neg_log_fidelity_per_site_limit(kSym, a, b);
    const double f1 = neg_log_fidelity_states(kSym, a, b, 1024).neg_log_f / (1024.0 * 1024);
    const double f2 = neg_log_fidelity_states(kSym, a, b, 2048).neg_log_f / (2048.0 * 2048);
    const double rich = 2 * f2 - f1; // O(1/L) elimination
    EXPECT_NEAR(lim, rich, 1e-6);
    EXPECT_NEAR(lim, f2, 1e-6);
    // the values are ~1e-10, so also compare at a tight tolerance
    const double tight = neg_log_fidelity_per_site_limit(kSym, a, b, 1e-17);
    EXPECT_NEAR(tight, f2, 1e-8 * f2);
}

TEST(PerSiteLimit, QuarterZoneEqualsFullZone) {
    const PhasePoint a{2.5, 0.5}, b{2.7, 0.6};
    const double quarter = neg_log_fidelity_per_site_limit(kAnti, a, b);
    auto f = [&](double k1, double k2) {
        const auto t = detail::mode_term(kAnti, std::cos(k1), std::cos(k2), a, b.mu - a.mu, b.j - a.j);
        return t.neg_log_f;
    };
    QuadratureOptions o;
    o.abs_tol = 1e-9;
    const auto full = integrate_2d(f, -kPi, kPi, -kPi, kPi, o);
    EXPECT_NEAR(quarter, full.values[0] / (8 * kPi * kPi), 1e-8);
}

TEST(PerSiteLimit, FiniteSizeConvergesForGappedPair) {
    const PhasePoint a{0.5, 0.5}, b{0.6, 0.55};
    const double lim = neg_log_fidelity_per_site_limit(kSym, a, b, 1e-10);
    double last = 1e300;
    for (int l : {64, 128, 256, 512}) {
        const double gap = std::abs(neg_log_fidelity_states(kSym, a, b, l).neg_log_f / (double(l) * l) - lim);
        EXPECT_LE(gap, last + 1e-10) << l;
        last = gap;
    }
    EXPECT_LT(last, 1e-8);
}

TEST(Susceptibility, ExactQuadraticDataRecoversCoefficient) {
    std::vector<double> d{1e-4, 2e-4, 3e-4, 5e-4, 8e-4};
    std::vector<double> y;
    for (double x : d) y.push_back(0.5 * 123.456 * x * x);
    const auto f = fit_susceptibility(d, y);
    EXPECT_NEAR(f.chi, 123.456, 1e-10 * 123.456);
    EXPECT_NEAR(f.linear, 0.0, 1e-12);
}

TEST(Susceptibility, CrossoverGridIsNonquadratic) {
    const auto grid = std::vector<double>{1e-6, 1e-5, 1e-4, 1e-3, 3e-3};
    try {
        fidelity_susceptibility_estimate({0, 1}, path_mu(), kSym, 1000, {}, grid);
        FAIL();
    } catch (const OutOfRegionError& e) {
        EXPECT_EQ(e.code(), "nonquadratic-regime");
    }
}

TEST(Susceptibility, GrowsAsLToTheFourthAtTheMuZeroLine) {
    const std::vector<double> grid{1e-6, 2e-6, 4e-6, 6e-6, 1e-5};
    const double c100 = fidelity_susceptibility_estimate({0, 1}, path_mu(), kSym, 100, {}, grid).chi;
    const double c200 = fidelity_susceptibility_estimate({0, 1}, path_mu(), kSym, 200, {}, grid).chi;
    EXPECT_NEAR(c200 / c100, 16.0, 0.05 * 16.0);
}

TEST(BrillouinIdentities, Enumerated) {
    auto s = brillouin_identities(2);
    EXPECT_NEAR(s.sum_inv_p, 0.0, 1e-12);
    EXPECT_NEAR(s.sum_inv_p2, 4.0, 1e-12);
    s = brillouin_identities(4);
    EXPECT_NEAR(s.sum_inv_p, 0.0, 1e-12);
    EXPECT_NEAR(s.sum_inv_p2, 64.0, 64e-12);
}

TEST(BrillouinIdentities, LargeGrid) {
    const double l = 256;
    const auto s = brillouin_identities(256);
    EXPECT_NEAR(s.sum_inv_p, 0.0, 1e-9 * l * l);
    EXPECT_NEAR(s.sum_inv_p2, l * l * l * l / 4, 1e-9 * l * l * l * l / 4);
}

TEST(BrillouinIdentities, RejectsUniformBoundaries) {
    BoundaryAssignment bc{Boundary::Periodic, Boundary::Periodic, true};
    EXPECT_THROW(brillouin_identities(4, bc), ValidationError);
}

TEST(McpExpansion, ClosedFormCoefficients) {
    auto r = mcp_expansion_coefficients(0, 1e-5, {});
    EXPECT_NEAR(r.a, 2.0, 0.02);
    EXPECT_NEAR(r.b, 1.0, 0.01);
    r = mcp_expansion_coefficients(2, 1e-5, {});
    EXPECT_NEAR(r.b, 21.0, 0.21);
    r = mcp_expansion_coefficients(1, 1e-3, {});
    EXPECT_NEAR(r.a, 2 - 5e-6, 0.01 * 2);
    EXPECT_LT(r.odd_ratio, 0.01);
}

TEST(McpExpansion, DomainGuard) {
    try {
        mcp_expansion_coefficients(0, 1e-3, {10, 50, 100, 120});
        FAIL();
    } catch (const OutOfRegionError& e) {
        EXPECT_EQ(e.code(), "out-of-expansion-domain");
    }
}
