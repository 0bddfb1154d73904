#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfid/asymptotics.hpp"
#include "qfid/errors.hpp"
#include "qfid/fidelity.hpp"
#include "qfid/fitting.hpp"

namespace qfid {

enum class SeriesAxis { VsL, VsDelta };

struct ScalingSeries {
    SeriesAxis axis = SeriesAxis::VsL;
    std::vector<double> x;
    std::vector<double> y; // -ln F
    // provenance
    CriticalNeighborhood nb{};
    ModelVariant variant = ModelVariant::Symmetric;
    BoundaryAssignment bc{};
    int l = 0; // fixed L of a VsDelta series

    std::size_t size() const noexcept { return x.size(); }
    ScalingSeries subset(std::span<const std::size_t> idx) const {
        ScalingSeries s = *this;
        s.x.clear();
        s.y.clear();
        for (auto i : idx) {
            s.x.push_back(x[i]);
            s.y.push_back(y[i]);
        }
        return s;
    }
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    double r_squared = 1.0;
    std::size_t n_points = 0;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

// ---- schedules ----

inline int next_fig3(int l) { return 4 * static_cast<int>(std::ceil(1.05 * l / 4.0)); }

// Step 4 from l_min up to l_star, then L -> 4 ceil(1.05 L / 4).
inline std::vector<int> l_schedule_fig3(int l_min, int l_max, int l_star = 10000) {
    validate_size(l_min);
    std::vector<int> ls;
    int l = l_min;
    while (l <= l_max) {
        ls.push_back(l);
        l = l < l_star ? l + 4 : next_fig3(l);
    }
    return ls;
}

inline std::vector<int> l_schedule_step4(int l_min, int l_max) {
    return l_schedule_fig3(l_min, l_max, std::numeric_limits<int>::max());
}

// Multiples of 4 roughly uniform in log L, duplicates dropped. L = 2 mod 4
// puts (0, pi/2) on the mixed grid, an exact eps = 0 mode at |mu| = 1.
inline std::vector<int> l_schedule_log(int l_min, int l_max, int per_decade = 24) {
    validate_size(l_min);
    std::vector<int> ls;
    const double a = std::log10(l_min), b = std::log10(l_max);
    const int n = static_cast<int>(std::ceil((b - a) * per_decade));
    for (int i = 0; i <= n; ++i) {
        const double v = std::pow(10.0, a + (b - a) * i / std::max(1, n));
        int l = 4 * static_cast<int>(std::lround(v / 4));
        l = std::clamp(l, l_min, l_max - l_max % 2);
        if (ls.empty() || l > ls.back()) ls.push_back(l);
    }
    return ls;
}

inline void validate_schedule(std::span<const int> ls) {
    if (ls.empty()) throw ValidationError("invalid-schedule", "empty L schedule");
    for (std::size_t i = 0; i < ls.size(); ++i) {
        if (ls[i] < 2 || ls[i] % 2 != 0)
            throw ValidationError("invalid-schedule", "schedule entry " + std::to_string(ls[i]) + " is not even >= 2");
        if (i && ls[i] <= ls[i - 1]) throw ValidationError("invalid-schedule", "schedule must be increasing");
    }
}

// Log-spaced deltas, per_decade points per decade, endpoints included.
inline std::vector<double> log_delta_grid(double lo, double hi, int per_decade = 12) {
    if (!(lo > 0) || !(hi > lo)) throw ValidationError("invalid-parameter", "delta grid needs 0 < lo < hi");
    const double a = std::log10(lo), b = std::log10(hi);
    const int n = std::max(1, static_cast<int>(std::lround((b - a) * per_decade)));
    std::vector<double> d(n + 1);
    for (int i = 0; i <= n; ++i) d[i] = std::pow(10.0, a + (b - a) * i / n);
    return d;
}

// ---- sweeps ----

struct SweepVsL {
    ScalingSeries raw;
    ScalingSeries step4; // entries below l_star that sit on the step-4 lattice of the first entry
};

inline SweepVsL sweep_vs_l(const CriticalNeighborhood& nb, ModelVariant v, BoundaryAssignment bc,
                           std::span<const int> schedule, int threads = 1, int l_star = 10000,
                           const Progress& progress = {}) {
    validate_schedule(schedule);
    nb.validate();
    SweepVsL s;
    s.raw.axis = SeriesAxis::VsL;
    s.raw.nb = nb;
    s.raw.variant = v;
    s.raw.bc = bc;
    s.step4 = s.raw;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const int l = schedule[i];
        const double y = nb.delta == 0.0 ? 0.0 : neg_log_fidelity(nb, v, l, bc, threads).neg_log_f;
        s.raw.x.push_back(l);
        s.raw.y.push_back(y);
        if (l < l_star && (l - schedule[0]) % 4 == 0) {
            s.step4.x.push_back(l);
            s.step4.y.push_back(y);
        }
        if (progress) progress(i + 1, schedule.size());
    }
    return s;
}

inline ScalingSeries sweep_vs_delta(const CriticalNeighborhood& nb, ModelVariant v, BoundaryAssignment bc, int l,
                                    std::span<const double> delta_grid, int threads = 1,
                                    const Progress& progress = {}) {
    validate_size(l);
    ScalingSeries s;
    s.axis = SeriesAxis::VsDelta;
    s.nb = nb;
    s.variant = v;
    s.bc = bc;
    s.l = l;
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        const double d = delta_grid[i];
        if (!(d > 0)) throw ValidationError("invalid-parameter", "delta grid entries must be positive");
        if (i && d <= delta_grid[i - 1]) throw ValidationError("invalid-parameter", "delta grid must increase");
        s.x.push_back(d);
        s.y.push_back(neg_log_fidelity(nb.with_delta(d), v, l, bc, threads).neg_log_f);
        if (progress) progress(i + 1, delta_grid.size());
    }
    return s;
}

// ---- fits ----

// Second differences of ln y changing sign more than `max_changes` times
// (ignoring |d2| below noise) marks an oscillating series.
inline std::size_t curvature_sign_changes(const ScalingSeries& s, double noise = 1e-9) {
    std::size_t changes = 0;
    int last = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (!(s.y[i - 1] > 0 && s.y[i] > 0 && s.y[i + 1] > 0)) continue;
        const double d2 = std::log(s.y[i + 1]) - 2 * std::log(s.y[i]) + std::log(s.y[i - 1]);
        if (std::abs(d2) < noise) continue;
        const int sg = d2 > 0 ? 1 : -1;
        if (last != 0 && sg != last) ++changes;
        last = sg;
    }
    return changes;
}

inline bool is_oscillating(const ScalingSeries& s, std::size_t max_changes = 6) {
    return curvature_sign_changes(s) > max_changes;
}

struct PowerLawOptions {
    std::size_t min_points = 5;
    bool reject_oscillating = false;
};

inline PowerLawFit fit_power_law(const ScalingSeries& s, std::pair<double, double> window, PowerLawOptions o = {}) {
    std::vector<double> xs, ys;
    ScalingSeries in = s;
    in.x.clear();
    in.y.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.x[i] < window.first || s.x[i] > window.second) continue;
        if (!(s.y[i] > 0)) throw ValidationError("nonpositive-value", "-ln F <= 0 inside the fit window");
        in.x.push_back(s.x[i]);
        in.y.push_back(s.y[i]);
    }
    if (in.size() < o.min_points)
        throw ValidationError("insufficient-points", std::to_string(in.size()) + " points in the fit window, need " +
                                                         std::to_string(o.min_points));
    if (o.reject_oscillating && is_oscillating(in))
        throw ValidationError("oscillating-series", "raw series oscillates; fit its envelope minima instead");
    const auto f = loglog_fit(in.x, in.y);
    PowerLawFit p;
    p.slope = f.slope;
    p.intercept = f.intercept;
    p.slope_stderr = f.slope_stderr;
    p.r_squared = f.r_squared;
    p.window = {in.x.front(), in.x.back()};
    p.n_points = in.size();
    return p;
}

inline PowerLawFit fit_power_law(const ScalingSeries& s) {
    return fit_power_law(s, {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()});
}

// Strict local minima.
inline ScalingSeries envelope_minima(const ScalingSeries& s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < s.size(); ++i)
        if (s.y[i] < s.y[i - 1] && s.y[i] < s.y[i + 1]) idx.push_back(i);
    if (idx.size() < 3)
        throw ValidationError("insufficient-oscillation", "fewer than 3 local minima in the series");
    return s.subset(idx);
}

// ---- crossovers ----

struct CrossoverReport {
    std::vector<double> locations;
    std::vector<PowerLawFit> regime_fits;
    std::vector<std::pair<std::string, double>> reference_lengths;
    bool collapsed = false; // fewer regimes than requested were supported
    double total_r_squared = 0.0;
};

struct CrossoverOptions {
    std::size_t min_points_per_regime = 5;
    double min_decades = 3.0;
    // a split is kept only if both neighbouring slopes differ by this much
    double min_slope_change = 0.15;
};

namespace detail {

// O(1) least-squares SSE on index ranges via prefix sums.
struct SegmentFitter {
    std::vector<double> sx, sy, sxx, sxy, syy;
    explicit SegmentFitter(std::span<const double> x, std::span<const double> y) {
        const std::size_t n = x.size();
        sx.assign(n + 1, 0);
        sy = sxx = sxy = syy = sx;
        for (std::size_t i = 0; i < n; ++i) {
            sx[i + 1] = sx[i] + x[i];
            sy[i + 1] = sy[i] + y[i];
            sxx[i + 1] = sxx[i] + x[i] * x[i];
            sxy[i + 1] = sxy[i] + x[i] * y[i];
            syy[i + 1] = syy[i] + y[i] * y[i];
        }
    }
    double sse(std::size_t a, std::size_t b) const { // [a, b)
        const double n = static_cast<double>(b - a);
        const double mx = (sx[b] - sx[a]) / n, my = (sy[b] - sy[a]) / n;
        const double cxx = (sxx[b] - sxx[a]) - n * mx * mx;
        const double cxy = (sxy[b] - sxy[a]) - n * mx * my;
        const double cyy = (syy[b] - syy[a]) - n * my * my;
        return std::max(0.0, cyy - (cxx > 0 ? cxy * cxy / cxx : 0.0));
    }
};

} // namespace detail

// Piecewise power laws with breakpoints chosen by exhaustive search to
// minimise the total SSE on the log-log axis (maximal total R^2). A breakpoint
// is placed at the geometric mean of the two samples it separates.
inline CrossoverReport detect_crossovers(const ScalingSeries& s, int expected_regimes, CrossoverOptions o = {}) {
    if (expected_regimes != 2 && expected_regimes != 3)
        throw ValidationError("invalid-parameter", "expected_regimes must be 2 or 3");
    const std::size_t n = s.size();
    if (n < 2 * o.min_points_per_regime) throw ValidationError("insufficient-points", "series too short");
    for (std::size_t i = 0; i < n; ++i)
        if (!(s.x[i] > 0) || !(s.y[i] > 0)) throw ValidationError("nonpositive-value", "series must be positive");
    if (std::log10(s.x.back() / s.x.front()) < o.min_decades - 1e-9)
        throw ValidationError("insufficient-span", "series spans fewer than " + num_str(o.min_decades) + " decades");

    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(s.x[i]);
        ly[i] = std::log(s.y[i]);
    }
    // centred so a constant factor in y cancels before the prefix sums
    std::vector<double> cx(lx), cy(ly);
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    for (std::size_t i = 0; i < n; ++i) {
        cx[i] -= mx;
        cy[i] -= my;
    }
    const detail::SegmentFitter seg(cx, cy);
    const std::size_t m = o.min_points_per_regime;
    double sst = 0;
    for (double v : cy) sst += v * v;
    // near-ties go to the earliest split
    const double tie = 1e-10 * sst;

    auto fit_segment = [&](std::size_t a, std::size_t b) {
        const auto f = ols(std::span(lx).subspan(a, b - a), std::span(ly).subspan(a, b - a));
        PowerLawFit p;
        p.slope = f.slope;
        p.intercept = f.intercept;
        p.slope_stderr = f.slope_stderr;
        p.r_squared = f.r_squared;
        p.window = {s.x[a], s.x[b - 1]};
        p.n_points = b - a;
        return p;
    };

    auto solve = [&](int regimes) {
        std::vector<std::size_t> cuts; // segment starts after the first
        double best = std::numeric_limits<double>::infinity();
        if (regimes == 1) {
            best = seg.sse(0, n);
        } else if (regimes == 2) {
            for (std::size_t i = m; i + m <= n; ++i) {
                const double v = seg.sse(0, i) + seg.sse(i, n);
                if (v < best - tie) {
                    best = v;
                    cuts = {i};
                }
            }
        } else {
            for (std::size_t i = m; i + 2 * m <= n; ++i) {
                const double a = seg.sse(0, i);
                for (std::size_t j = i + m; j + m <= n; ++j) {
                    const double v = a + seg.sse(i, j) + seg.sse(j, n);
                    if (v < best - tie) {
                        best = v;
                        cuts = {i, j};
                    }
                }
            }
        }
        return std::make_pair(best, cuts);
    };

    CrossoverReport rep;
    int regimes = expected_regimes;
    while (true) {
        auto [sse, cuts] = solve(regimes);
        std::vector<std::size_t> bounds{0};
        bounds.insert(bounds.end(), cuts.begin(), cuts.end());
        bounds.push_back(n);
        std::vector<PowerLawFit> fits;
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k) fits.push_back(fit_segment(bounds[k], bounds[k + 1]));
        bool distinct = true;
        for (std::size_t k = 0; k + 1 < fits.size(); ++k)
            if (std::abs(fits[k + 1].slope - fits[k].slope) < o.min_slope_change) distinct = false;
        if (distinct || regimes == 1) {
            rep.regime_fits = fits;
            for (auto c : cuts) rep.locations.push_back(std::sqrt(s.x[c - 1] * s.x[c]));
            rep.total_r_squared = sst > 0 ? 1.0 - sse / sst : 1.0;
            rep.collapsed = regimes < expected_regimes;
            break;
        }
        --regimes;
    }
    return rep;
}

// Attaches xi_lower / xi_upper (VsL) or delta_lower / delta_upper (VsDelta).
inline void attach_reference_lengths(CrossoverReport& rep, CriticalRegion region, const ScalingSeries& s,
                                     const RegionConfig& cfg = {}) {
    if (s.axis == SeriesAxis::VsL) {
        const auto b = xi_lower_upper(region, s.nb, cfg);
        rep.reference_lengths = {{"xi_lower", b.xi_lower}, {"xi_upper", b.xi_upper}};
    } else {
        rep.reference_lengths = {
            {"delta_lower", effective_deviation(region, s.nb, s.l, Direction::axial(), cfg)},
            {"delta_upper", effective_deviation(region, s.nb, s.l, Direction::diagonal(), cfg)}};
    }
}

// ---- exponents ----

inline double extract_nu_small_system(const PowerLawFit& f) {
    if (!(f.slope > 0)) throw ValidationError("nonpositive-slope", "small-system slope must be positive");
    return 2.0 / f.slope;
}

struct MacroscopicNu {
    double nu = 0.0;
    bool anomalous = false;
    double r_squared = 1.0;
    double slope_drift = 0.0; // |slope(second half) - slope(first half)|
};

struct AnomalyOptions {
    double min_r_squared = 0.9999;
    double max_slope_drift = 0.1;
};

// nu = slope / D. The anomalous flag is raised when the window is not a clean
// power law: low R^2, or the local slope drifting across the window.
inline MacroscopicNu extract_nu_macroscopic(const PowerLawFit& f, int d = 2, double slope_drift = 0.0,
                                            AnomalyOptions o = {}) {
    if (!(f.slope > 0)) throw ValidationError("nonpositive-slope", "macroscopic slope must be positive");
    if (d < 1) throw ValidationError("invalid-parameter", "dimension must be positive");
    MacroscopicNu m;
    m.nu = f.slope / d;
    m.r_squared = f.r_squared;
    m.slope_drift = slope_drift;
    m.anomalous = f.r_squared < o.min_r_squared || slope_drift > o.max_slope_drift;
    return m;
}

// Fit over the window plus the half-window slope drift.
inline MacroscopicNu extract_nu_macroscopic(const ScalingSeries& s, std::pair<double, double> window, int d = 2,
                                            AnomalyOptions o = {}) {
    const auto f = fit_power_law(s, window);
    const double mid = std::sqrt(f.window.first * f.window.second);
    PowerLawOptions po;
    po.min_points = 3;
    const auto lo = fit_power_law(s, {f.window.first, mid}, po);
    const auto hi = fit_power_law(s, {mid, f.window.second}, po);
    return extract_nu_macroscopic(f, d, std::abs(hi.slope - lo.slope), o);
}

} // namespace qfid
