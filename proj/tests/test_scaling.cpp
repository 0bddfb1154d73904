#include <gtest/gtest.h>

#include <cmath>

#include "qfid/scaling.hpp"

using namespace qfid;

namespace {

ScalingSeries synthetic(std::vector<double> x, auto f) {
    ScalingSeries s;
    s.x = std::move(x);
    for (double v : s.x) s.y.push_back(f(v));
    return s;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    return v;
}

} // namespace

TEST(Schedules, Fig3Step) {
    EXPECT_EQ(next_fig3(10000), 10500);
    const auto s = l_schedule_fig3(9992, 11600);
    EXPECT_EQ(s, (std::vector<int>{9992, 9996, 10000, 10500, 11028, 11580}));
    EXPECT_EQ(l_schedule_step4(4, 16), (std::vector<int>{4, 8, 12, 16}));
}

TEST(Schedules, LogScheduleEvenIncreasing) {
    const auto s = l_schedule_log(8, 12288);
    EXPECT_EQ(s.front(), 8);
    EXPECT_EQ(s.back(), 12288);
    EXPECT_NO_THROW(validate_schedule(s));
}

TEST(Schedules, Invalid) {
    const std::vector<int> odd{4, 7, 8}, down{8, 4}, empty;
    for (const auto* s : {&odd, &down, &empty}) {
        try {
            validate_schedule(*s);
            FAIL();
        } catch (const ValidationError& e) {
            EXPECT_EQ(e.code(), "invalid-schedule");
        }
    }
}

TEST(Schedules, DeltaGrid) {
    const auto g = log_delta_grid(1e-6, 1e-3);
    EXPECT_EQ(g.size(), 37u);
    EXPECT_DOUBLE_EQ(g.front(), 1e-6);
    EXPECT_NEAR(g.back(), 1e-3, 1e-18);
    EXPECT_THROW(log_delta_grid(0, 1), ValidationError);
}

TEST(Sweeps, ZeroDeltaIsZero) {
    const std::vector<int> ls{8, 12, 16};
    const auto s = sweep_vs_l({{0, 1}, path_mu(), 1.0, 0.0}, ModelVariant::Symmetric, {}, ls);
    for (double y : s.raw.y) EXPECT_EQ(y, 0.0);
}

TEST(Sweeps, Step4SubseriesAndDeterminism) {
    const std::vector<int> ls{8, 10, 12, 14, 16};
    const CriticalNeighborhood nb{{0, 1}, path_mu(), 1.0, 1e-3};
    const auto a = sweep_vs_l(nb, ModelVariant::Symmetric, {}, ls, 1);
    const auto b = sweep_vs_l(nb, ModelVariant::Symmetric, {}, ls, 4);
    EXPECT_EQ(a.raw.y, b.raw.y);
    EXPECT_EQ(a.step4.x, (std::vector<double>{8, 12, 16}));
}

TEST(Sweeps, SmallDeltaSlopeIsTwo) {
    const auto grid = log_delta_grid(1e-7, 1e-6, 6);
    const auto s = sweep_vs_delta({{0, 1}, path_mu(), 1.0, 1e-6}, ModelVariant::Symmetric, {}, 64, grid);
    EXPECT_NEAR(fit_power_law(s).slope, 2.0, 0.05);
    const std::vector<double> bad{1e-6, 1e-7};
    EXPECT_THROW(sweep_vs_delta({{0, 1}, path_mu(), 1.0, 1e-6}, ModelVariant::Symmetric, {}, 64, bad),
                 ValidationError);
}

TEST(PowerLaw, ExactData) {
    auto s = synthetic(logspace(1, 1000, 20), [](double x) { return 3 * x * x; });
    auto f = fit_power_law(s, {1, 1000});
    EXPECT_NEAR(f.slope, 2.0, 1e-10);
    EXPECT_EQ(f.slope_stderr, 0.0);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
    s = synthetic(logspace(1, 1000, 20), [](double x) { return x * x * x * x; });
    EXPECT_NEAR(fit_power_law(s).slope, 4.0, 1e-10);
}

TEST(PowerLaw, Errors) {
    auto s = synthetic(logspace(1, 1000, 20), [](double x) { return x; });
    try {
        fit_power_law(s, {1, 3});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.code(), "insufficient-points");
    }
    s.y[3] = 0;
    EXPECT_THROW(fit_power_law(s), ValidationError);
}

TEST(PowerLaw, OscillationRejected) {
    std::vector<double> x;
    for (int i = 20; i < 200; ++i) x.push_back(i);
    const auto s = synthetic(x, [](double v) { return std::pow(v, 4) * (1 + 0.9 * std::sin(v) * std::sin(v)); });
    EXPECT_TRUE(is_oscillating(s));
    PowerLawOptions o;
    o.reject_oscillating = true;
    EXPECT_THROW(fit_power_law(s, {20, 200}, o), ValidationError);
    EXPECT_FALSE(is_oscillating(synthetic(x, [](double v) { return v * v; })));
}

TEST(Envelope, MinimaOnLowerEnvelope) {
    std::vector<double> x;
    for (int i = 64; i <= 400; ++i) x.push_back(i * std::numbers::pi / 8);
    const auto s = synthetic(x, [](double v) { return std::pow(v, 4) * (1 + 0.9 * std::sin(v) * std::sin(v)); });
    const auto m = envelope_minima(s);
    ASSERT_GE(m.size(), 3u);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m.y[i] / std::pow(m.x[i], 4), 1.0, 1e-12);
    EXPECT_NEAR(fit_power_law(m).slope, 4.0, 1e-10);
}

TEST(Envelope, MonotoneRaises) {
    try {
        envelope_minima(synthetic(logspace(1, 100, 20), [](double x) { return x; }));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.code(), "insufficient-oscillation");
    }
}

namespace {

double two_slopes(double x) { return x < 100 ? x * x : 1e4 * std::pow(x / 100, 4); }
double three_slopes(double x) {
    if (x < 50) return std::pow(x, 4);
    if (x < 1000) return std::pow(50.0, 4) * std::pow(x / 50, 1.0);
    return std::pow(50.0, 4) * 20 * std::pow(x / 1000, 2.0);
}

} // namespace

TEST(Crossover, TwoRegimeBreak) {
    const auto s = synthetic(logspace(1, 1e4, 97), two_slopes);
    const auto r = detect_crossovers(s, 2);
    ASSERT_EQ(r.locations.size(), 1u);
    EXPECT_GE(r.locations[0], 80);
    EXPECT_LE(r.locations[0], 125);
    EXPECT_NEAR(r.regime_fits[0].slope, 2, 0.05);
    EXPECT_NEAR(r.regime_fits[1].slope, 4, 0.05);
    EXPECT_FALSE(r.collapsed);
    EXPECT_GT(r.regime_fits[0].r_squared, 0.999);
}

TEST(Crossover, RescaleInvariant) {
    auto s = synthetic(logspace(1, 1e4, 97), three_slopes);
    const auto a = detect_crossovers(s, 3);
    for (double& y : s.y) y *= 1e-7;
    const auto b = detect_crossovers(s, 3);
    EXPECT_EQ(a.locations, b.locations);
    ASSERT_EQ(a.locations.size(), 2u);
    EXPECT_GE(a.locations[0], 40);
    EXPECT_LE(a.locations[0], 62.5);
    EXPECT_GE(a.locations[1], 800);
    EXPECT_LE(a.locations[1], 1250);
    for (std::size_t i = 0; i + 1 < a.locations.size(); ++i) EXPECT_LT(a.locations[i], a.locations[i + 1]);
    for (std::size_t i = 0; i < a.locations.size(); ++i) {
        EXPECT_GE(a.locations[i], a.regime_fits[i].window.second);
        EXPECT_LE(a.locations[i], a.regime_fits[i + 1].window.first);
    }
}

TEST(Crossover, CollapsesOnSinglePowerLaw) {
    const auto s = synthetic(logspace(1, 1e4, 60), [](double x) { return 5 * x * x; });
    const auto r = detect_crossovers(s, 3);
    EXPECT_TRUE(r.collapsed);
    EXPECT_TRUE(r.locations.empty());
    EXPECT_EQ(r.regime_fits.size(), 1u);
}

TEST(Crossover, Errors) {
    EXPECT_THROW(detect_crossovers(synthetic(logspace(1, 100, 40), two_slopes), 2), ValidationError);
    EXPECT_THROW(detect_crossovers(synthetic(logspace(1, 1e4, 40), two_slopes), 4), ValidationError);
}

TEST(Crossover, ReferenceLengths) {
    ScalingSeries s;
    s.nb = {{0, 1}, path_mu(), 1.0, 1e-3};
    CrossoverReport r;
    attach_reference_lengths(r, CriticalRegion::SymMuZeroLine, s);
    const auto b = xi_lower_upper(CriticalRegion::SymMuZeroLine, s.nb);
    ASSERT_EQ(r.reference_lengths.size(), 2u);
    EXPECT_EQ(r.reference_lengths[0].first, "xi_lower");
    EXPECT_DOUBLE_EQ(r.reference_lengths[0].second, b.xi_lower);
    EXPECT_DOUBLE_EQ(r.reference_lengths[1].second, b.xi_upper);
    s.axis = SeriesAxis::VsDelta;
    s.l = 10000;
    attach_reference_lengths(r, CriticalRegion::SymMuZeroLine, s);
    EXPECT_EQ(r.reference_lengths[1].first, "delta_upper");
    EXPECT_NEAR(r.reference_lengths[1].second, 1.414e-4, 1e-7);
}

TEST(Nu, SmallSystem) {
    PowerLawFit f;
    f.slope = 4;
    EXPECT_DOUBLE_EQ(extract_nu_small_system(f), 0.5);
    f.slope = 2;
    EXPECT_DOUBLE_EQ(extract_nu_small_system(f), 1.0);
    f.slope = 8;
    EXPECT_DOUBLE_EQ(extract_nu_small_system(f), 0.25);
    f.slope = 0;
    EXPECT_THROW(extract_nu_small_system(f), ValidationError);
}

TEST(Nu, SmallSystemRoundTrip) {
    for (double nu : {0.25, 0.5, 1.0, 2.0}) {
        const auto s = synthetic(logspace(4, 40, 10), [nu](double x) { return 1e-6 * std::pow(x, 2 / nu); });
        EXPECT_NEAR(extract_nu_small_system(fit_power_law(s)), nu, 1e-12);
    }
}

TEST(Nu, Macroscopic) {
    PowerLawFit f;
    f.slope = 1;
    EXPECT_DOUBLE_EQ(extract_nu_macroscopic(f).nu, 0.5);
    f.slope = 2;
    EXPECT_DOUBLE_EQ(extract_nu_macroscopic(f).nu, 1.0);
    f.slope = -1;
    EXPECT_THROW(extract_nu_macroscopic(f), ValidationError);
}

TEST(Nu, AnomalyFlag) {
    const auto clean = synthetic(logspace(1e-3, 1e-1, 25), [](double x) { return 7 * x; });
    EXPECT_FALSE(extract_nu_macroscopic(clean, {1e-3, 1e-1}).anomalous);
    const auto curved = synthetic(logspace(1e-3, 1e-1, 25), [](double x) { return x * std::pow(std::log(1 / x), 2); });
    const auto m = extract_nu_macroscopic(curved, {1e-3, 1e-1});
    EXPECT_TRUE(m.anomalous);
    EXPECT_GT(m.slope_drift, 0.1);
}
