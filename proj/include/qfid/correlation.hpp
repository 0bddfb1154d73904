#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <span>
#include <vector>

#include "qfid/model.hpp"
#include "qfid/quadrature.hpp"

namespace qfid {

struct LatticeVector {
    int r1 = 0;
    int r2 = 0;
    friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
};

enum class CorrelationMethod { FiniteSum, Quadrature };

struct CorrelationSample {
    LatticeVector r{};
    double g_value = 0.0;
    double h_value = 0.0;
    CorrelationMethod method = CorrelationMethod::FiniteSum;
};

struct OrderParameters {
    double o1 = 0.0;
    double o2 = 0.0;
};

namespace detail {

// |v_k|^2 = (1 - eps/E)/2 without cancellation.
inline double v_squared(double e, double g) noexcept {
    const double en = std::sqrt(e * e + g * g);
    if (en == 0.0) return 0.5;
    return e > 0 ? 0.5 * g * g / (en * (en + e)) : 0.5 * (en - e) / en;
}

inline std::vector<double> cos_multiples(const std::vector<double>& k, int r) {
    std::vector<double> c(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) c[i] = std::cos(k[i] * r);
    return c;
}

} // namespace detail

// Both finite-size correlations at every r in rs, cosine-product form.
inline std::vector<CorrelationSample> correlations_finite(const ModelParams& p, std::span<const LatticeVector> rs,
                                                          int threads = 1) {
    p.validate();
    KGrid grid(p.l, p.bc);
    const auto& a = grid.folded1();
    const auto& b = grid.folded2();
    const double inv_n = 1.0 / (static_cast<double>(p.l) * p.l);
    return map_indexed<CorrelationSample>(rs.size(), threads, [&](std::size_t ir) {
        const auto r = rs[ir];
        const auto ca = detail::cos_multiples(a.k, r.r1);
        const auto cb = detail::cos_multiples(b.k, r.r2);
        std::vector<double> gs(a.k.size()), hs(a.k.size());
        for (std::size_t i = 0; i < a.k.size(); ++i) {
            CompensatedSum sg, sh;
            for (std::size_t m = 0; m < b.k.size(); ++m) {
                const double e = epsilon_c(a.cosk[i], b.cosk[m], p.mu);
                const double g = p.j * pairing_c(p.variant, a.cosk[i], b.cosk[m]);
                const double en = std::sqrt(e * e + g * g);
                const double wc = b.weight[m] * cb[m];
                sg.add(wc * detail::v_squared(e, g));
                if (g != 0.0) sh.add(wc * g / en);
            }
            gs[i] = a.weight[i] * ca[i] * sg.value();
            hs[i] = a.weight[i] * ca[i] * sh.value();
        }
        CorrelationSample s;
        s.r = r;
        s.g_value = inv_n * pairwise_sum(gs);
        s.h_value = -0.5 * inv_n * pairwise_sum(hs);
        s.method = CorrelationMethod::FiniteSum;
        return s;
    });
}

inline double correlation_g_finite(const ModelParams& p, LatticeVector r) {
    const LatticeVector rs[1] = {r};
    return correlations_finite(p, rs)[0].g_value;
}

inline double correlation_h_finite(const ModelParams& p, LatticeVector r) {
    const LatticeVector rs[1] = {r};
    return correlations_finite(p, rs)[0].h_value;
}

struct CorrelationLimitOptions {
    double abs_tol = 1e-9;
    double min_width = 1e-6;
    std::size_t max_cells = 4'000'000;
};

enum class CorrelationKind { G, H };

// Thermodynamic-limit values at every r in rs on one shared adaptive mesh:
//   G(r) = delta_{r,0}/2 - (1/2pi^2) int (eps/E) cos k1r1 cos k2r2
//   h(r) =               - (1/2pi^2) int (J p/E) cos k1r1 cos k2r2
// The delta term is the filled-band part of |v|^2 = (1 - eps/E)/2.
inline std::vector<double> correlation_limit_batch(CorrelationKind kind, ModelVariant v, double mu, double j,
                                                   std::span<const LatticeVector> rs,
                                                   CorrelationLimitOptions o = {}) {
    if (rs.empty()) return {};
    if (!std::isfinite(mu) || !std::isfinite(j)) throw ValidationError("invalid-parameter", "mu and J must be finite");
    if (kind == CorrelationKind::H && j == 0.0) return std::vector<double>(rs.size(), 0.0);
    const double scale = 1.0 / (2 * std::numbers::pi * std::numbers::pi);
    QuadratureOptions q;
    q.abs_tol = o.abs_tol / scale;
    q.min_width = o.min_width;
    q.max_cells = o.max_cells;
    for (const auto& r : rs) {
        q.freq1 = std::max(q.freq1, std::abs(static_cast<double>(r.r1)));
        q.freq2 = std::max(q.freq2, std::abs(static_cast<double>(r.r2)));
    }
    auto kernel = [&](double k1, double k2) {
        const double c1 = std::cos(k1), c2 = std::cos(k2);
        const double e = epsilon_c(c1, c2, mu);
        const double g = j * pairing_c(v, c1, c2);
        const double en = std::sqrt(e * e + g * g);
        if (en == 0.0) return 0.0; // measure-zero point
        return kind == CorrelationKind::G ? e / en : g / en;
    };
    auto fa = [&](std::size_t i, double x) { return std::cos(rs[i].r1 * x); };
    auto fb = [&](std::size_t i, double y) { return std::cos(rs[i].r2 * y); };
    const auto res = integrate_2d_separable(kernel, rs.size(), fa, fb, 0.0, std::numbers::pi, 0.0, std::numbers::pi, q);
    std::vector<double> out(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        out[i] = -scale * res.values[i];
        if (kind == CorrelationKind::G && rs[i].r1 == 0 && rs[i].r2 == 0) out[i] += 0.5;
    }
    return out;
}

inline double correlation_g_limit(ModelVariant v, double mu, double j, LatticeVector r, CorrelationLimitOptions o = {}) {
    const LatticeVector rs[1] = {r};
    return correlation_limit_batch(CorrelationKind::G, v, mu, j, rs, o)[0];
}

inline double correlation_h_limit(ModelVariant v, double mu, double j, LatticeVector r, CorrelationLimitOptions o = {}) {
    const LatticeVector rs[1] = {r};
    return correlation_limit_batch(CorrelationKind::H, v, mu, j, rs, o)[0];
}

// O1 = G(0) - 1/2, O2 = -h(1,0), at the finite size in p.
// The pairing amplitude is real and folded into J, so O2 carries no extra factor.
inline OrderParameters order_parameters(const ModelParams& p, int threads = 1) {
    const LatticeVector rs[2] = {{0, 0}, {1, 0}};
    const auto s = correlations_finite(p, rs, threads);
    return {s[0].g_value - 0.5, -s[1].h_value};
}

} // namespace qfid
