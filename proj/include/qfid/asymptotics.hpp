#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qfid/correlation.hpp"
#include "qfid/errors.hpp"
#include "qfid/fidelity.hpp"
#include "qfid/fitting.hpp"

namespace qfid {

enum class CriticalRegion { SymMuZeroLine, SymJZeroSegment, SymEndPoint, SymMulticritical, AntiMuEdge };

inline ModelVariant region_variant(CriticalRegion r) {
    return r == CriticalRegion::AntiMuEdge ? ModelVariant::Antisymmetric : ModelVariant::Symmetric;
}

// Approach path of each region: mu-path, J-path or 45 degrees.
inline UnitVector region_path(CriticalRegion r) {
    switch (r) {
    case CriticalRegion::SymMuZeroLine:
    case CriticalRegion::AntiMuEdge: return path_mu();
    case CriticalRegion::SymJZeroSegment:
    case CriticalRegion::SymEndPoint: return path_j();
    case CriticalRegion::SymMulticritical: return path_diag45();
    }
    return path_mu();
}

inline const char* region_name(CriticalRegion r) {
    switch (r) {
    case CriticalRegion::SymMuZeroLine: return "sym-mu0";
    case CriticalRegion::SymJZeroSegment: return "sym-j0";
    case CriticalRegion::SymEndPoint: return "sym-endpoint";
    case CriticalRegion::SymMulticritical: return "sym-mcp";
    case CriticalRegion::AntiMuEdge: return "anti-edge";
    }
    return "?";
}

struct RegionConfig {
    double j0_sym = 0.1;             // SymMuZeroLine needs |J| >= this
    double j0_anti = 0.1;            // AntiMuEdge formulas need |J| >= this
    double j0_anti_hierarchy = 0.25; // hierarchy checks only above this
    double segment_margin = 0.1;     // SymJZeroSegment keeps |mu| in [m, 2 - m]
    double max_delta = 0.05;         // distance of a state point from its critical set
};

// Leading-order parameters. Inverse lengths are stored because 1/xi_2 may be
// negative. inv_xi_pm and theta refer to the diagonal index r' (r1 = r2 = r').
struct RegionalParameters {
    bool critical = false; // on the critical set: every xi infinite
    double inv_xi_pm = 0.0;
    double theta = 0.0;
    double inv_xi1 = 0.0;
    double inv_xi2 = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    std::optional<double> phi;
};

struct Direction {
    enum class Kind { Axial, Diagonal, Ray };
    Kind kind = Kind::Axial;
    double n = 0.0;

    static Direction axial() { return {Kind::Axial, 0.0}; }
    static Direction diagonal() { return {Kind::Diagonal, 1.0}; }
    static Direction ray(double n) {
        if (n == 1.0) return diagonal();
        return {Kind::Ray, n};
    }
    std::string label() const {
        if (kind == Kind::Axial) return "axial";
        if (kind == Kind::Diagonal) return "diag";
        char buf[32];
        std::snprintf(buf, sizeof buf, "n=%g", n);
        return buf;
    }
};

namespace detail {

[[noreturn]] inline void out_of_region(CriticalRegion r, const std::string& why) {
    throw OutOfRegionError("out-of-region", std::string(region_name(r)) + ": " + why);
}

inline void check_finite(double mu, double j) {
    if (!std::isfinite(mu) || !std::isfinite(j)) throw ValidationError("invalid-parameter", "mu and J must be finite");
}

} // namespace detail

inline RegionalParameters regional_parameters(CriticalRegion region, double mu, double j, const RegionConfig& cfg = {}) {
    detail::check_finite(mu, j);
    const double am = std::abs(mu), aj = std::abs(j);
    RegionalParameters p;
    switch (region) {
    case CriticalRegion::SymMuZeroLine: {
        if (aj < cfg.j0_sym) detail::out_of_region(region, "|J| below J0");
        if (am > cfg.max_delta) detail::out_of_region(region, "|mu| outside the validity window");
        if (am == 0.0) {
            p.critical = true;
            return p;
        }
        const double s = std::sqrt(1 + j * j);
        const double half = 0.5 * std::atan(aj);
        p.inv_xi_pm = am * aj / (1 + j * j);
        p.theta = std::numbers::pi - am / (1 + j * j);
        p.inv_xi1 = std::sqrt(2 * am / s) * std::sin(half);
        p.inv_xi2 = -0.5 * p.inv_xi1;
        p.theta2 = std::sqrt(am / (2 * s)) * std::cos(half);
        p.theta1 = std::numbers::pi - 2 * p.theta2;
        return p;
    }
    case CriticalRegion::SymJZeroSegment: {
        if (am < cfg.segment_margin || am > 2 - cfg.segment_margin)
            detail::out_of_region(region, "|mu| too close to 0 or 2");
        if (aj > cfg.max_delta) detail::out_of_region(region, "|J| outside the validity window");
        if (aj == 0.0) {
            p.critical = true;
            return p;
        }
        const double q = std::sqrt(am / (2 - am));
        p.inv_xi_pm = 2 * am * aj / std::sqrt(4 - mu * mu);
        p.theta = 2 * std::acos(am / 2);
        p.inv_xi1 = aj * q;
        p.theta1 = std::numbers::pi - 2 * std::asin(std::sqrt(am / 2)) + 0.5 * q * (3 - am) / (2 - am) * j * j;
        p.inv_xi2 = 0.5 * (am - 1) * p.inv_xi1;
        p.theta2 = 0.5 * std::sqrt(am * (2 - am));
        return p;
    }
    case CriticalRegion::SymEndPoint: {
        if (std::abs(am - 2) > 1e-9) detail::out_of_region(region, "|mu| must equal 2");
        if (aj > cfg.max_delta) detail::out_of_region(region, "|J| outside the validity window");
        if (aj == 0.0) {
            p.critical = true;
            return p;
        }
        p.inv_xi_pm = 2 * std::sqrt(aj);
        p.theta = 2 * std::sqrt(aj);
        p.inv_xi1 = std::sqrt(2 * aj);
        p.inv_xi2 = 0.5 * p.inv_xi1;
        p.theta1 = p.inv_xi1;
        p.theta2 = 0.5 * p.theta1;
        return p;
    }
    case CriticalRegion::SymMulticritical:
        throw OutOfRegionError("no-closed-form", "sym-mcp has no closed-form parameters; use the ray-scan fit");
    case CriticalRegion::AntiMuEdge: {
        if (aj < cfg.j0_anti) detail::out_of_region(region, "|J| too close to zero");
        if (am - 2 > cfg.max_delta) detail::out_of_region(region, "|mu| - 2 outside the validity window");
        if (am <= 2) { // inside the gapless stripe
            p.critical = true;
            return p;
        }
        const double s = std::sqrt(1 + j * j), d = am - 2;
        p.inv_xi_pm = 2 * std::sqrt(d / (1 + j * j));
        p.theta = 0.0;
        p.inv_xi1 = std::sqrt((s + 1) / (1 + j * j)) * std::sqrt(d);
        p.theta1 = std::sqrt((s - 1) / (1 + j * j)) * std::sqrt(d);
        p.inv_xi2 = -(0.5 - 1 / s) * p.inv_xi1;
        p.theta2 = -(0.5 + 1 / s) * p.theta1;
        p.phi = std::numbers::pi / 4;
        return p;
    }
    }
    detail::out_of_region(region, "unknown region");
}

namespace detail {

inline void check_ray(double n) {
    if (!(n >= 3.0 || (n > 0 && n <= 1.0 / 3.0)))
        throw OutOfRegionError("direction-out-of-validity", "offdiagonal formulas need n >= 3 or n <= 1/3");
}

// n <= 1/3 maps to 1/n by the pi/2 symmetry
inline double canonical_n(double n) { return n < 1 ? 1 / n : n; }

} // namespace detail

// Inverse correlation length and wavenumber per unit Euclidean distance.
struct DirectionalRates {
    double inv_xi = 0.0;
    double theta = 0.0;
};

inline DirectionalRates directional_rates(const RegionalParameters& p, Direction d) {
    switch (d.kind) {
    case Direction::Kind::Axial: return {p.inv_xi1, p.theta1};
    case Direction::Kind::Diagonal:
        return {p.inv_xi_pm / std::numbers::sqrt2, p.theta / std::numbers::sqrt2};
    case Direction::Kind::Ray: {
        detail::check_ray(d.n);
        const double n = detail::canonical_n(d.n);
        const double w = std::sqrt(n * n / (1 + n * n));
        return {w * (p.inv_xi1 + p.inv_xi2 / (n * n)), w * (p.theta1 + p.theta2 / (n * n))};
    }
    }
    return {};
}

// Euclidean correlation length in direction d; infinite on the critical set.
inline double directional_xi(CriticalRegion region, double mu, double j, Direction d, const RegionConfig& cfg = {}) {
    const auto p = regional_parameters(region, mu, j, cfg);
    if (p.critical) return std::numeric_limits<double>::infinity();
    const double ix = directional_rates(p, d).inv_xi;
    if (!(ix > 0)) throw OutOfRegionError("out-of-region", "non-positive decay rate for " + d.label());
    return 1.0 / ix;
}

struct AsymptoticPrediction {
    double amplitude = 0.0;
    double xi = 0.0;    // in the formula's own distance variable (r' on the diagonal, Euclidean r off it)
    double theta = 0.0; // same variable
    std::optional<double> phi;
    Direction validity{};
    double envelope = 0.0;       // |amplitude| exp(-x/xi)/x
    std::optional<double> value; // only when the phase is known
};

// Diagonal G(r', r').
inline AsymptoticPrediction predict_g_diagonal(CriticalRegion region, double mu, double j, double r_prime,
                                               const RegionConfig& cfg = {}) {
    if (!(r_prime > 0)) throw ValidationError("invalid-parameter", "r' must be positive");
    const auto p = regional_parameters(region, mu, j, cfg);
    if (p.critical) throw OutOfRegionError("critical-point", "no finite correlation length on the critical set");
    AsymptoticPrediction a;
    a.validity = Direction::diagonal();
    a.xi = 1.0 / p.inv_xi_pm;
    a.theta = p.theta;
    const double decay = std::exp(-r_prime / a.xi) / r_prime;
    const double sgn = mu > 0 ? 1.0 : (mu < 0 ? -1.0 : 0.0);
    if (region_variant(region) == ModelVariant::Symmetric) {
        a.amplitude = -sgn / (2 * std::numbers::pi) * std::pow(j * j / (1 + j * j), 0.25);
        a.envelope = std::abs(a.amplitude) * decay;
    } else {
        // sign taken from the exact integral, opposite to the printed prefactor
        a.amplitude = sgn * std::abs(j) / (4 * std::numbers::pi * a.xi);
        a.phi = 0.0;
        a.envelope = std::abs(a.amplitude) * decay;
        a.value = a.amplitude * decay;
    }
    return a;
}

// Offdiagonal G along r1/r2 = n at Euclidean distance r.
inline AsymptoticPrediction predict_g_offdiagonal(CriticalRegion region, double mu, double j, double n, double r,
                                                  const RegionConfig& cfg = {}) {
    detail::check_ray(n);
    if (!(r > 0)) throw ValidationError("invalid-parameter", "r must be positive");
    const auto p = regional_parameters(region, mu, j, cfg);
    if (p.critical) throw OutOfRegionError("critical-point", "no finite correlation length on the critical set");
    const Direction d = Direction::ray(n);
    const auto rates = directional_rates(p, d);
    if (!(rates.inv_xi > 0)) throw OutOfRegionError("out-of-region", "non-positive decay rate");
    const double nn = detail::canonical_n(n);
    AsymptoticPrediction a;
    a.validity = d;
    a.xi = 1.0 / rates.inv_xi;
    a.theta = rates.theta;
    a.phi = p.phi;
    a.amplitude = -1.0 / (2 * std::numbers::pi) * std::pow(mu * mu * j * j / (1 + j * j), 0.25) *
                  std::sqrt((1 + nn * nn) / (nn * nn));
    const double decay = std::exp(-r / a.xi) / r;
    a.envelope = std::abs(a.amplitude) * decay;
    if (a.phi) {
        // C_r needs the lattice point; it is 1 for mu > 0
        const double r1 = r * nn / std::sqrt(1 + nn * nn);
        const double r2 = r1 / nn;
        const bool lattice = std::abs(r1 - std::round(r1)) < 1e-9 && std::abs(r2 - std::round(r2)) < 1e-9;
        double cr = 1.0;
        if (mu < 0) {
            if (!lattice) return a;
            const long long s = std::llround(r1) + std::llround(r2) + 1;
            cr = (s % 2 == 0) ? 1.0 : -1.0;
        }
        a.value = cr * a.amplitude * decay * std::cos(r * a.theta + *a.phi);
    }
    return a;
}

namespace detail {

inline void check_path(CriticalRegion region, UnitVector e) {
    const auto pth = region_path(region);
    if (std::abs(std::abs(e.mu * pth.mu + e.j * pth.j) - 1.0) > 1e-12)
        throw OutOfRegionError("path-mismatch", std::string(region_name(region)) + " is approached along its own path");
}

inline void check_lambda_c(CriticalRegion region, PhasePoint lc, const RegionConfig& cfg) {
    const double am = std::abs(lc.mu), aj = std::abs(lc.j);
    bool ok = true;
    switch (region) {
    case CriticalRegion::SymMuZeroLine: ok = lc.mu == 0.0 && aj >= cfg.j0_sym; break;
    case CriticalRegion::SymJZeroSegment:
        ok = lc.j == 0.0 && am >= cfg.segment_margin && am <= 2 - cfg.segment_margin;
        break;
    case CriticalRegion::SymEndPoint: ok = lc.j == 0.0 && am == 2.0; break;
    case CriticalRegion::SymMulticritical: ok = lc.mu == 0.0 && lc.j == 0.0; break;
    case CriticalRegion::AntiMuEdge: ok = am == 2.0 && aj >= cfg.j0_anti; break;
    }
    if (!ok) throw OutOfRegionError("out-of-region", std::string(region_name(region)) + ": lambda_c not in its critical set");
}

} // namespace detail

// min over the two state points of the directional xi.
inline double effective_correlation_length(CriticalRegion region, const CriticalNeighborhood& nb, Direction d,
                                           const RegionConfig& cfg = {}) {
    nb.validate();
    detail::check_path(region, nb.e);
    detail::check_lambda_c(region, nb.lambda_c, cfg);
    const auto a = nb.state_minus(), b = nb.state_plus();
    const double xa = directional_xi(region, a.mu, a.j, d, cfg);
    const double xb = directional_xi(region, b.mu, b.j, d, cfg);
    if (std::isinf(xa) && std::isinf(xb))
        throw OutOfRegionError("undefined-effective-length", "both state points are critical");
    return std::min(xa, xb);
}

struct XiBounds {
    double xi_lower = 0.0;
    double xi_upper = 0.0;
};

// lower = axial, upper = diagonal effective length.
inline XiBounds xi_lower_upper(CriticalRegion region, const CriticalNeighborhood& nb, const RegionConfig& cfg = {}) {
    return {effective_correlation_length(region, nb, Direction::axial(), cfg),
            effective_correlation_length(region, nb, Direction::diagonal(), cfg)};
}

// Solves xi_eff(delta) = L by bisection on log delta. The window is every
// delta keeping both state points inside cfg.max_delta of lambda_c.
inline double effective_deviation(CriticalRegion region, CriticalNeighborhood nb, int l, Direction d,
                                  const RegionConfig& cfg = {}) {
    validate_size(l);
    const double hi0 = cfg.max_delta / (std::abs(nb.c) + 1);
    const double lo0 = 1e-14;
    auto xi = [&](double delta) { return effective_correlation_length(region, nb.with_delta(delta), d, cfg); };
    if (xi(hi0) > l || xi(lo0) < l)
        throw OutOfRegionError("out-of-window", "no delta in the validity window gives xi = " + std::to_string(l));
    double lo = std::log(lo0), hi = std::log(hi0);
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (xi(std::exp(mid)) > l ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

struct RayFit {
    Direction direction{};
    double step = 0.0;        // Euclidean spacing of lattice points on the ray
    std::vector<double> r;    // Euclidean distances
    std::vector<double> g;    // G at those points
    DampedCosineFit fit{};    // model for r G(r)
};

// Lattice points on a ray: axial (t, 0), diagonal (t, t), ray (n t, t) for integer n.
inline std::vector<LatticeVector> ray_points(Direction d, double r_min, double r_max, double* step) {
    int n1 = 1, n2 = 0;
    if (d.kind == Direction::Kind::Diagonal) n2 = 1;
    if (d.kind == Direction::Kind::Ray) {
        const double n = detail::canonical_n(d.n);
        if (std::abs(n - std::round(n)) > 1e-12) throw ValidationError("invalid-parameter", "ray scans need integer n");
        n1 = static_cast<int>(std::lround(n));
        n2 = 1;
    }
    const double s = std::hypot(n1, n2);
    if (step) *step = s;
    std::vector<LatticeVector> pts;
    for (int t = std::max(1, static_cast<int>(std::ceil(r_min / s - 1e-12))); t * s <= r_max + 1e-9; ++t)
        pts.push_back({n1 * t, n2 * t});
    return pts;
}

// Thermodynamic-limit G along a lattice ray, fitted as r G = e^{-kappa r}(a cos + b sin).
inline RayFit ray_scan_fit(ModelVariant v, double mu, double j, Direction d, double r_min, double r_max,
                           bool oscillate = true, CorrelationLimitOptions o = {}) {
    RayFit rf;
    rf.direction = d;
    const auto pts = ray_points(d, r_min, r_max, &rf.step);
    rf.g = correlation_limit_batch(CorrelationKind::G, v, mu, j, pts, o);
    std::vector<double> y(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        rf.r.push_back(std::hypot(pts[i].r1, pts[i].r2));
        y[i] = rf.r.back() * rf.g[i];
    }
    rf.fit = fit_damped_cosine(rf.r, y, oscillate);
    return rf;
}

struct NumericXi {
    double xi = 0.0;
    double theta = 0.0; // folded into [0, pi/step]
    RayFit ray;
    bool capped = false; // the [3 xi, 5 xi] window did not fit below r_cap
    int iterations = 0;
};

// Correlation length from quadrature alone: fit, move the window to
// [3 xi, 5 xi], refit until xi settles to 1%. Used where no closed form exists.
inline NumericXi numeric_correlation_length(ModelVariant v, double mu, double j, Direction d,
                                            double r_cap = std::numeric_limits<double>::infinity(),
                                            bool oscillate = true, CorrelationLimitOptions o = {},
                                            int max_iterations = 6) {
    double step = 0;
    ray_points(d, 1, 1, &step);
    constexpr int kMinPoints = 12;
    double lo = 2 * step, hi = lo + 40 * step;
    NumericXi out;
    double prev = 0;
    for (int it = 0; it < max_iterations; ++it) {
        hi = std::min(hi, r_cap);
        lo = std::min(lo, hi - kMinPoints * step);
        if (lo < step) throw ValidationError("invalid-parameter", "r_cap too small for a ray fit");
        out.ray = ray_scan_fit(v, mu, j, d, lo, hi, oscillate, o);
        out.iterations = it + 1;
        if (!(out.ray.fit.kappa > 0)) throw AccuracyError("fit-failure", "fitted decay rate is not positive");
        out.xi = 1 / out.ray.fit.kappa;
        out.theta = out.ray.fit.theta;
        if (prev > 0 && std::abs(out.xi / prev - 1) < 0.01) break;
        prev = out.xi;
        lo = 3 * out.xi;
        hi = std::max(5 * out.xi, lo + kMinPoints * step);
        out.capped = hi > r_cap;
    }
    return out;
}

} // namespace qfid
