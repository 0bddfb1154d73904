#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "qfid/errors.hpp"
#include "qfid/summation.hpp"

namespace qfid {

struct QuadratureOptions {
    double abs_tol = 1e-9;
    double min_width = 1e-6;
    std::size_t max_cells = 4'000'000;
    // largest angular frequency of oscillating factors along each axis
    double freq1 = 0.0;
    double freq2 = 0.0;
    double points_per_period = 8.0; // never below 4
    int initial_cells = 4;          // per axis
};

struct QuadratureResult {
    std::vector<double> values;
    double error = 0.0;            // sum of per-cell estimates still open
    double unresolved_error = 0.0; // cells accepted at min_width
    std::size_t cells = 0;
};

namespace detail {

inline constexpr int kGaussOrder = 10;

struct GaussRule {
    std::array<double, kGaussOrder> x{}; // on [-1, 1]
    std::array<double, kGaussOrder> w{};
};

inline const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, kGaussOrder>;
        GaussRule r;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        constexpr int h = kGaussOrder / 2;
        for (int i = 0; i < h; ++i) {
            r.x[h - 1 - i] = -a[i];
            r.w[h - 1 - i] = wt[i];
            r.x[h + i] = a[i];
            r.w[h + i] = wt[i];
        }
        return r;
    }();
    return rule;
}

struct Rect {
    double x0, x1, y0, y1;
    double width() const { return std::max(x1 - x0, y1 - y0); }
};

} // namespace detail

// Global adaptive cubature. `rule(rect, out)` writes m cell integrals. Each
// leaf carries the sum over its four children; the leaf error is the max
// component of |parent - children|. The leaf with the worst error is split
// until the open error drops below abs_tol.
template <class CellRule>
QuadratureResult adaptive_cubature(CellRule&& rule, std::size_t m, double ax, double bx, double ay,
                                   double by, const QuadratureOptions& opt) {
    using detail::Rect;
    const double ppp = std::max(4.0, opt.points_per_period);
    const int n = detail::kGaussOrder;
    auto cells_for = [&](double len, double freq) {
        const int dense = static_cast<int>(std::ceil(len * freq * ppp / (2.0 * std::numbers::pi * n)));
        return std::max(opt.initial_cells, dense);
    };
    const int nx = cells_for(bx - ax, opt.freq1);
    int ny = cells_for(by - ay, opt.freq2);
    // unequal counts keep x and y nodes from coinciding, so nodal lines such as
    // k1 = k2 or k1 + k2 = pi never pass exactly through a node
    if (ny == nx) ++ny;

    struct Leaf {
        Rect r;
        double err;
        bool alive;
    };
    std::vector<Leaf> leaves;
    std::vector<double> fine; // m values per leaf
    std::vector<double> coarse(m), tmp(m), acc(m);

    auto add_leaf = [&](const Rect& r) {
        const double xm = 0.5 * (r.x0 + r.x1), ym = 0.5 * (r.y0 + r.y1);
        const Rect kids[4] = {{r.x0, xm, r.y0, ym}, {xm, r.x1, r.y0, ym}, {r.x0, xm, ym, r.y1}, {xm, r.x1, ym, r.y1}};
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const auto& kr : kids) {
            rule(kr, tmp.data());
            for (std::size_t i = 0; i < m; ++i) acc[i] += tmp[i];
        }
        rule(r, coarse.data());
        double e = 0.0;
        for (std::size_t i = 0; i < m; ++i) e = std::max(e, std::abs(acc[i] - coarse[i]));
        if (!std::isfinite(e)) throw AccuracyError("quadrature-nonconvergence", "non-finite integrand");
        leaves.push_back({r, e, true});
        fine.insert(fine.end(), acc.begin(), acc.end());
        return leaves.size() - 1;
    };

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item> heap;
    double open_err = 0.0;
    const double hx = (bx - ax) / nx, hy = (by - ay) / ny;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const Rect r{ax + i * hx, i + 1 == nx ? bx : ax + (i + 1) * hx, ay + j * hy,
                         j + 1 == ny ? by : ay + (j + 1) * hy};
            const auto id = add_leaf(r);
            heap.push({leaves[id].err, id});
            open_err += leaves[id].err;
        }

    double unresolved = 0.0;
    // Splitting a leaf replaces its estimate by four finer ones.
    while (open_err > opt.abs_tol && !heap.empty()) {
        const auto [err, id] = heap.top();
        heap.pop();
        open_err -= err;
        if (leaves[id].r.width() <= opt.min_width) {
            unresolved += err;
            continue;
        }
        if (leaves.size() + 4 > opt.max_cells) {
            open_err += err;
            CompensatedSum s;
            for (std::size_t k = 0; k < leaves.size(); ++k)
                if (leaves[k].alive) s.add(fine[k * m]);
            throw AccuracyError("quadrature-nonconvergence",
                                "cell budget exhausted with error estimate " + num_str(open_err),
                                s.value());
        }
        leaves[id].alive = false;
        const Rect r = leaves[id].r;
        const double xm = 0.5 * (r.x0 + r.x1), ym = 0.5 * (r.y0 + r.y1);
        const Rect kids[4] = {{r.x0, xm, r.y0, ym}, {xm, r.x1, r.y0, ym}, {r.x0, xm, ym, r.y1}, {xm, r.x1, ym, r.y1}};
        for (const auto& kr : kids) {
            const auto kid = add_leaf(kr);
            heap.push({leaves[kid].err, kid});
            open_err += leaves[kid].err;
        }
        if (open_err < 0) open_err = 0;
    }

    QuadratureResult res;
    res.values.assign(m, 0.0);
    std::vector<std::vector<double>> cols(m);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        if (!leaves[k].alive) continue;
        ++res.cells;
        res.error += leaves[k].err;
        for (std::size_t i = 0; i < m; ++i) cols[i].push_back(fine[k * m + i]);
    }
    for (std::size_t i = 0; i < m; ++i) res.values[i] = pairwise_sum(cols[i]);
    res.error -= unresolved;
    if (res.error < 0) res.error = 0;
    res.unresolved_error = unresolved;
    return res;
}

// Scalar integrand f(x, y).
template <class F>
QuadratureResult integrate_2d(F&& f, double ax, double bx, double ay, double by, const QuadratureOptions& opt = {}) {
    const auto& g = detail::gauss_rule();
    auto rule = [&](const detail::Rect& r, double* out) {
        const double cx = 0.5 * (r.x0 + r.x1), sx = 0.5 * (r.x1 - r.x0);
        const double cy = 0.5 * (r.y0 + r.y1), sy = 0.5 * (r.y1 - r.y0);
        double s = 0.0;
        for (int p = 0; p < detail::kGaussOrder; ++p) {
            double row = 0.0;
            const double x = cx + sx * g.x[p];
            for (int q = 0; q < detail::kGaussOrder; ++q) row += g.w[q] * f(x, cy + sy * g.x[q]);
            s += g.w[p] * row;
        }
        out[0] = s * sx * sy;
    };
    return adaptive_cubature(rule, 1, ax, bx, ay, by, opt);
}

// Batch of integrands sharing one smooth kernel:
//   I_i = int F(x, y) a_i(x) b_i(y),  i < m.
// a(i, x) and b(i, y) are called once per node and component.
template <class F, class A, class B>
QuadratureResult integrate_2d_separable(F&& kernel, std::size_t m, A&& a, B&& b, double ax, double bx, double ay,
                                        double by, const QuadratureOptions& opt = {}) {
    const auto& g = detail::gauss_rule();
    constexpr int n = detail::kGaussOrder;
    auto rule = [&, m](const detail::Rect& r, double* out) {
        const double cx = 0.5 * (r.x0 + r.x1), sx = 0.5 * (r.x1 - r.x0);
        const double cy = 0.5 * (r.y0 + r.y1), sy = 0.5 * (r.y1 - r.y0);
        std::array<double, n> xs, ys;
        for (int p = 0; p < n; ++p) {
            xs[p] = cx + sx * g.x[p];
            ys[p] = cy + sy * g.x[p];
        }
        std::array<double, n * n> fw; // weighted kernel values
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) fw[p * n + q] = g.w[p] * g.w[q] * kernel(xs[p], ys[q]);
        std::array<double, n> av, bv;
        for (std::size_t i = 0; i < m; ++i) {
            for (int p = 0; p < n; ++p) {
                av[p] = a(i, xs[p]);
                bv[p] = b(i, ys[p]);
            }
            double s = 0.0;
            for (int p = 0; p < n; ++p) {
                double row = 0.0;
                for (int q = 0; q < n; ++q) row += fw[p * n + q] * bv[q];
                s += av[p] * row;
            }
            out[i] = s * sx * sy;
        }
    };
    return adaptive_cubature(rule, m, ax, bx, ay, by, opt);
}

} // namespace qfid
