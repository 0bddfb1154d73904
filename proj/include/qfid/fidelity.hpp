#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfid/errors.hpp"
#include "qfid/model.hpp"
#include "qfid/quadrature.hpp"
#include "qfid/summation.hpp"

namespace qfid {

struct PhasePoint {
    double mu = 0.0;
    double j = 0.0;
    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

struct UnitVector {
    double mu = 1.0;
    double j = 0.0;
};

inline UnitVector path_mu() { return {1.0, 0.0}; }
inline UnitVector path_j() { return {0.0, 1.0}; }
inline UnitVector path_diag45() { return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2}; }

struct CriticalNeighborhood {
    PhasePoint lambda_c{};
    UnitVector e{};
    double c = 0.0;
    double delta = 0.0;

    void validate() const {
        if (std::abs(std::hypot(e.mu, e.j) - 1.0) > 1e-12)
            throw ValidationError("invalid-direction", "direction e must be a unit vector");
        if (!std::isfinite(c) || !std::isfinite(delta))
            throw ValidationError("invalid-parameter", "c and delta must be finite");
    }
    PhasePoint state_minus() const { return {lambda_c.mu + (c - 1) * delta * e.mu, lambda_c.j + (c - 1) * delta * e.j}; }
    PhasePoint state_plus() const { return {lambda_c.mu + (c + 1) * delta * e.mu, lambda_c.j + (c + 1) * delta * e.j}; }
    CriticalNeighborhood with_delta(double d) const {
        auto n = *this;
        n.delta = d;
        return n;
    }
};

struct FidelityResult {
    double neg_log_f = 0.0;
    int l = 0;
    long long n_modes = 0;
    double min_mode_f = 1.0;
};

inline constexpr double kOrthogonalFloor = 1e-300;

namespace detail {

struct ModeTerm {
    double neg_log_f; // -ln f
    double f;
};

// -ln f for one mode between s1 and s2 = s1 + (dmu, dj). The Lagrange identity
// |a|^2|b|^2 - (a.b)^2 = (a x b)^2 gives 1-f (or f) without cancellation.
inline ModeTerm mode_term(ModelVariant v, double c1, double c2, PhasePoint s1, double dmu, double dj) {
    const double p = pairing_c(v, c1, c2);
    const double e1 = c1 + c2 - s1.mu;
    const double e2 = e1 - dmu;
    const double j2 = s1.j + dj;
    const double g1 = s1.j * p, g2 = j2 * p;
    const double n1 = std::sqrt(e1 * e1 + g1 * g1);
    const double n2 = std::sqrt(e2 * e2 + g2 * g2);
    const double norm = n1 * n2;
    if (!(norm > 0.0)) throw AccuracyError("gapless-mode", "E_k = 0 on the grid");
    const double dot = e1 * e2 + g1 * g2;
    const double cross = p * (e1 * dj + dmu * s1.j);
    const double c2x = cross * cross;
    if (dot >= 0.0) {
        const double one_minus_f = 0.5 * c2x / (norm * (norm + dot));
        return {-std::log1p(-one_minus_f), 1.0 - one_minus_f};
    }
    const double f = 0.5 * c2x / (norm * (norm - dot));
    if (!(f > kOrthogonalFloor))
        throw AccuracyError("orthogonal-mode", "mode fidelity below 1e-300 (degenerate pair)");
    return {-std::log(f), f};
}

inline void check_states(PhasePoint a, PhasePoint b) {
    if (!std::isfinite(a.mu) || !std::isfinite(a.j) || !std::isfinite(b.mu) || !std::isfinite(b.j))
        throw ValidationError("invalid-parameter", "state points must be finite");
}

// Sum over the folded grid; s2 = s1 + (dmu, dj).
inline FidelityResult folded_neg_log_f(ModelVariant v, PhasePoint s1, double dmu, double dj, int l,
                                       BoundaryAssignment bc, int threads) {
    KGrid g(l, bc);
    const auto& a = g.folded1();
    const auto& b = g.folded2();
    struct Row {
        double sum;
        double minf;
    };
    auto rows = map_indexed<Row>(a.cosk.size(), threads, [&](std::size_t i) {
        CompensatedSum s;
        double minf = 1.0;
        const double c1 = a.cosk[i];
        for (std::size_t m = 0; m < b.cosk.size(); ++m) {
            const auto t = mode_term(v, c1, b.cosk[m], s1, dmu, dj);
            s.add(b.weight[m] * t.neg_log_f);
            minf = std::min(minf, t.f);
        }
        return Row{a.weight[i] * s.value(), minf};
    });
    std::vector<double> sums(rows.size());
    FidelityResult r;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sums[i] = rows[i].sum;
        r.min_mode_f = std::min(r.min_mode_f, rows[i].minf);
    }
    r.neg_log_f = 0.5 * pairwise_sum(sums);
    r.l = l;
    r.n_modes = static_cast<long long>(l) * l;
    return r;
}

} // namespace detail

inline double mode_fidelity(Momentum k, const ModelParams& p1, const ModelParams& p2) {
    if (p1.variant != p2.variant || p1.l != p2.l || !(p1.bc == p2.bc))
        throw ValidationError("mismatched-params", "both states must share variant, L and boundaries");
    const auto t = detail::mode_term(p1.variant, std::cos(k.k1), std::cos(k.k2), {p1.mu, p1.j}, p2.mu - p1.mu,
                                     p2.j - p1.j);
    return t.f;
}

// -ln F between two arbitrary state points on one grid.
inline FidelityResult neg_log_fidelity_states(ModelVariant v, PhasePoint s1, PhasePoint s2, int l,
                                              BoundaryAssignment bc = {}, int threads = 1) {
    detail::check_states(s1, s2);
    return detail::folded_neg_log_f(v, s1, s2.mu - s1.mu, s2.j - s1.j, l, bc, threads);
}

inline FidelityResult neg_log_fidelity(const CriticalNeighborhood& nb, ModelVariant v, int l,
                                       BoundaryAssignment bc = {}, int threads = 1) {
    nb.validate();
    // the state difference is exactly 2 delta e
    return detail::folded_neg_log_f(v, nb.state_minus(), 2 * nb.delta * nb.e.mu, 2 * nb.delta * nb.e.j, l, bc,
                                    threads);
}

// (1/2pi^2) int_{[0,pi]^2} -ln f, i.e. lim -ln F / L^2.
inline double neg_log_fidelity_per_site_limit(ModelVariant v, PhasePoint s_minus, PhasePoint s_plus,
                                              double abs_tol = 1e-8, QuadratureOptions opt = {}) {
    detail::check_states(s_minus, s_plus);
    if (s_minus == s_plus) return 0.0;
    const double dmu = s_plus.mu - s_minus.mu, dj = s_plus.j - s_minus.j;
    const double scale = 1.0 / (2 * std::numbers::pi * std::numbers::pi);
    opt.abs_tol = abs_tol / scale;
    auto f = [&](double k1, double k2) {
        return detail::mode_term(v, std::cos(k1), std::cos(k2), s_minus, dmu, dj).neg_log_f;
    };
    const auto r = integrate_2d(f, 0.0, std::numbers::pi, 0.0, std::numbers::pi, opt);
    return scale * r.values[0];
}

struct SusceptibilityFit {
    double chi = 0.0;
    double linear = 0.0;        // fitted coefficient of delta
    double max_rel_residual = 0.0;
};

struct SusceptibilityOptions {
    double max_rel_residual = 1e-3;
    // |linear * delta_max| allowed relative to the quadratic term at delta_max
    double max_linear_ratio = 1e-3;
};

// Least squares y = alpha delta + beta delta^2 with relative weights; chi = 2 beta.
inline SusceptibilityFit fit_susceptibility(std::span<const double> deltas, std::span<const double> y,
                                            SusceptibilityOptions o = {}) {
    const std::size_t n = y.size();
    if (n < 3 || deltas.size() != n) throw ValidationError("insufficient-points", "need at least 3 deltas");
    const double dmax = *std::max_element(deltas.begin(), deltas.end());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(deltas[i] > 0) || !(y[i] > 0)) throw ValidationError("nonpositive-value", "deltas and -ln F must be positive");
        const double x = deltas[i] / dmax;
        A(i, 0) = x / y[i];
        A(i, 1) = x * x / y[i];
        b(i) = 1.0;
    }
    const Eigen::Vector2d s = A.colPivHouseholderQr().solve(b);
    SusceptibilityFit f;
    f.linear = s(0) / dmax;
    const double beta = s(1) / (dmax * dmax);
    f.chi = 2 * beta;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = deltas[i];
        f.max_rel_residual = std::max(f.max_rel_residual, std::abs(f.linear * d + beta * d * d - y[i]) / y[i]);
    }
    if (f.max_rel_residual > o.max_rel_residual ||
        std::abs(f.linear * dmax) > o.max_linear_ratio * std::abs(beta * dmax * dmax))
        throw OutOfRegionError("nonquadratic-regime", "quadratic fit residual " + num_str(f.max_rel_residual));
    return f;
}

// chi_e(lambda) from -ln F between lambda -+ delta e over delta_grid.
inline SusceptibilityFit fidelity_susceptibility_estimate(PhasePoint lambda, UnitVector e, ModelVariant v, int l,
                                                          BoundaryAssignment bc, std::span<const double> delta_grid,
                                                          int threads = 1, SusceptibilityOptions o = {}) {
    if (delta_grid.size() < 3) throw ValidationError("insufficient-points", "need at least 3 deltas");
    std::vector<double> y(delta_grid.size());
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        if (!(delta_grid[i] > 0)) throw ValidationError("invalid-parameter", "deltas must be positive");
        y[i] = neg_log_fidelity(CriticalNeighborhood{lambda, e, 0.0, delta_grid[i]}, v, l, bc, threads).neg_log_f;
        if (y[i] >= 0.1)
            throw OutOfRegionError("nonquadratic-regime", "-ln F >= 0.1 at delta = " + num_str(delta_grid[i]));
    }
    return fit_susceptibility(delta_grid, y, o);
}

struct BrillouinSums {
    double sum_inv_p = 0.0;
    double sum_inv_p2 = 0.0;
};

// Sums of 1/p and 1/p^2, p = cos k1 + cos k2, over the full grid.
inline BrillouinSums brillouin_identities(int l, BoundaryAssignment bc = {}, int threads = 1) {
    validate_size(l);
    if (!bc.mixed()) throw ValidationError("uniform-boundary", "identities need mixed boundaries");
    KGrid g(l, bc);
    auto guard = [](double p) {
        if (p == 0.0) throw AccuracyError("grid-degeneracy", "p = 0 on the grid");
        return p;
    };
    BrillouinSums s;
    s.sum_inv_p = grid_sum(g, threads, [&](double c1, double c2) { return 1.0 / guard(c1 + c2); });
    s.sum_inv_p2 = grid_sum(g, threads, [&](double c1, double c2) {
        const double p = guard(c1 + c2);
        return 1.0 / (p * p);
    });
    return s;
}

struct McpCoefficients {
    double a = 0.0;
    double b = 0.0;
    // from the fit a + g x + b x^2, x = delta L: |g| x_max / |a|
    double odd_ratio = 0.0;
    std::vector<int> l_grid;
};

struct McpOptions {
    double max_delta_l = 0.1;
    // the quartic truncation needs the smallest |p| ~ pi^2/(2 L^2) to stay
    // well above delta, i.e. delta L^2 small
    double max_delta_l2 = 0.05;
};

// Even L from 2 up to the expansion limits.
inline std::vector<int> mcp_default_l_grid(double delta, McpOptions o = {}) {
    const double lmax = std::min(o.max_delta_l / delta, std::sqrt(o.max_delta_l2 / delta));
    std::vector<int> ls;
    for (int l = 2; l <= lmax && (l * delta < o.max_delta_l); l += 2) ls.push_back(l);
    return ls;
}

// -4 ln F ~ a (dL)^2 + b (dL)^4 along mu = J = (c -+ 1) delta. Least squares on
// y = -4 ln F / (dL)^2 = a + b (dL)^2 with unit weights.
inline McpCoefficients mcp_expansion_coefficients(double c, double delta, std::vector<int> l_grid,
                                                  ModelVariant v = ModelVariant::Symmetric, int threads = 1,
                                                  McpOptions o = {}) {
    if (!(delta > 0)) throw ValidationError("invalid-parameter", "delta must be positive");
    if (l_grid.empty()) l_grid = mcp_default_l_grid(delta, o);
    if (l_grid.size() < 3) throw ValidationError("insufficient-points", "need at least 3 sizes");
    std::vector<double> x, y;
    for (int l : l_grid) {
        validate_size(l);
        if (delta * l >= o.max_delta_l)
            throw OutOfRegionError("out-of-expansion-domain", "delta*L >= 0.1 at L = " + std::to_string(l));
        if (delta * l * l > o.max_delta_l2)
            throw OutOfRegionError("out-of-expansion-domain",
                                   "delta*L^2 above " + num_str(o.max_delta_l2) + " at L = " + std::to_string(l));
        const PhasePoint s1{(c - 1) * delta, (c - 1) * delta};
        const auto r = detail::folded_neg_log_f(v, s1, 2 * delta, 2 * delta, l, {}, threads);
        const double dl = delta * l;
        x.push_back(dl);
        y.push_back(4 * r.neg_log_f / (dl * dl));
    }
    const std::size_t n = x.size();
    Eigen::MatrixXd A(n, 2), B(n, 3);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = x[i] * x[i];
        B(i, 0) = 1.0;
        B(i, 1) = x[i];
        B(i, 2) = x[i] * x[i];
        rhs(i) = y[i];
    }
    const Eigen::VectorXd ab = A.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd agb = B.colPivHouseholderQr().solve(rhs);
    McpCoefficients out;
    out.a = ab(0);
    out.b = ab(1);
    out.odd_ratio = std::abs(agb(1)) * *std::max_element(x.begin(), x.end()) / std::abs(agb(0));
    out.l_grid = std::move(l_grid);
    return out;
}

} // namespace qfid
