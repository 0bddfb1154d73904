#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "qfid/errors.hpp"

namespace qfid {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 1.0;
    double sse = 0.0;
    double sst = 0.0;
};

// Ordinary least squares y = intercept + slope x.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw ValidationError("insufficient-points", "ols needs >= 2 paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0)) throw ValidationError("insufficient-points", "ols needs distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        f.sse += r * r;
    }
    f.sst = syy;
    f.r_squared = syy > 0 ? std::clamp(1.0 - f.sse / syy, 0.0, 1.0) : 1.0;
    // tiny negative round-off in sse is clipped, exact data gives 0
    f.slope_stderr = n > 2 ? std::sqrt(std::max(0.0, f.sse / (n - 2)) / sxx) : 0.0;
    if (f.slope_stderr < 1e-14 * std::abs(f.slope)) f.slope_stderr = 0.0;
    return f;
}

// Least squares on (ln x, ln y).
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0))
            throw ValidationError("nonpositive-value", "log-log fit needs positive x and y");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return ols(lx, ly);
}

// y(r) = exp(-kappa (r - r_0)) (a cos(theta r) + b sin(theta r)), r_0 the first
// sample, theta in [0, pi/step]
// for samples with uniform spacing `step`.
struct DampedCosineFit {
    double kappa = 0.0;
    double theta = 0.0;
    double a = 0.0;
    double b = 0.0;
    double rel_rms = 0.0; // rms residual / rms data
    bool oscillating = true;
};

namespace detail {

// Linear amplitudes for fixed (kappa, theta); returns residuals.
inline Eigen::VectorXd damped_residual(const Eigen::VectorXd& r, const Eigen::VectorXd& y, double kappa, double theta,
                                       double r0, Eigen::Vector2d* ab = nullptr) {
    const auto n = r.size();
    Eigen::MatrixXd A(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = std::exp(-kappa * (r(i) - r0));
        A(i, 0) = e * std::cos(theta * r(i));
        A(i, 1) = e * std::sin(theta * r(i));
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
    if (ab) *ab = c;
    return A * c - y;
}

struct DampedFunctor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    Eigen::VectorXd r, y;
    double r0;
    int inputs() const { return 2; }
    int values() const { return static_cast<int>(r.size()); }
    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        f = damped_residual(r, y, p(0), p(1), r0);
        return 0;
    }
};

} // namespace detail

// Variable projection fit: (kappa, theta) by Levenberg-Marquardt, (a, b) by
// linear least squares. Prony's two-term recurrence on the uniform samples
// supplies the start. With oscillate=false the model is a pure exponential.
inline DampedCosineFit fit_damped_cosine(std::span<const double> rs, std::span<const double> ys, bool oscillate = true) {
    const std::size_t n = rs.size();
    if (n != ys.size() || n < (oscillate ? 6u : 3u))
        throw ValidationError("insufficient-points", "damped-cosine fit needs more samples");
    const double step = (rs.back() - rs.front()) / (n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(rs[i] - rs[i - 1] - step) > 1e-9 * std::max(1.0, step))
            throw ValidationError("nonuniform-samples", "damped-cosine fit needs uniform spacing");

    DampedCosineFit out;
    out.oscillating = oscillate;
    if (!oscillate) {
        std::vector<double> ly(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(std::abs(ys[i]) > 0)) throw ValidationError("nonpositive-value", "zero sample in exponential fit");
            ly[i] = std::log(std::abs(ys[i]));
        }
        const auto f = ols(rs, ly);
        out.kappa = -f.slope;
        out.a = std::copysign(std::exp(f.intercept), ys[0]);
        double rr = 0, yy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = out.a * std::exp(-out.kappa * rs[i]);
            rr += (m - ys[i]) * (m - ys[i]);
            yy += ys[i] * ys[i];
        }
        out.rel_rms = std::sqrt(rr / yy);
        return out;
    }

    // Prony: y[i+1] = c1 y[i] + c2 y[i-1]
    Eigen::MatrixXd P(n - 2, 2);
    Eigen::VectorXd q(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        P(i - 1, 0) = ys[i];
        P(i - 1, 1) = ys[i - 1];
        q(i - 1) = ys[i + 1];
    }
    const Eigen::Vector2d c = P.colPivHouseholderQr().solve(q);
    double rho = std::sqrt(std::max(1e-300, -c(1)));
    double cw = std::clamp(c(0) / (2 * rho), -1.0, 1.0);
    if (c(1) >= 0) { // real roots: start from the dominant one
        const double disc = std::sqrt(std::max(0.0, c(0) * c(0) + 4 * c(1)));
        const double root = 0.5 * (c(0) + (c(0) >= 0 ? disc : -disc));
        rho = std::abs(root);
        cw = root >= 0 ? 1.0 : -1.0;
    }
    const double kappa0 = -std::log(std::max(rho, 1e-300)) / step;
    const double theta0 = std::acos(cw) / step;

    detail::DampedFunctor fn;
    fn.r = Eigen::Map<const Eigen::VectorXd>(rs.data(), static_cast<Eigen::Index>(n));
    fn.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(n));
    fn.r0 = rs.front();
    Eigen::NumericalDiff<detail::DampedFunctor> nd(fn);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::DampedFunctor>> lm(nd);
    Eigen::VectorXd p(2);
    p << kappa0, theta0;
    lm.minimize(p);

    Eigen::Vector2d ab;
    const auto res = detail::damped_residual(fn.r, fn.y, p(0), p(1), fn.r0, &ab);
    out.kappa = p(0);
    // fold theta into [0, pi/step]
    const double period = 2 * std::numbers::pi / step;
    double th = std::fmod(p(1), period);
    if (th < 0) th += period;
    if (th > period / 2) th = period - th;
    out.theta = th;
    out.a = ab(0);
    out.b = ab(1);
    out.rel_rms = std::sqrt(res.squaredNorm() / fn.y.squaredNorm());
    return out;
}

// theta is only known modulo 2 pi/step and up to sign on a uniform grid.
// Returns the member of that class nearest to `reference`.
inline double dealias_theta(double theta_folded, double step, double reference) {
    const double period = 2 * std::numbers::pi / step;
    double best = theta_folded, dist = 1e300;
    for (double s : {1.0, -1.0}) {
        const double base = s * theta_folded;
        const double k = std::round((reference - base) / period);
        for (double dk : {-1.0, 0.0, 1.0}) {
            const double cand = base + (k + dk) * period;
            if (std::abs(cand - reference) < dist) {
                dist = std::abs(cand - reference);
                best = cand;
            }
        }
    }
    return best;
}

// Folds any wavenumber into [0, pi/step].
inline double fold_theta(double theta, double step) {
    const double period = 2 * std::numbers::pi / step;
    double th = std::fmod(std::abs(theta), period);
    if (th > period / 2) th = period - th;
    return th;
}

} // namespace qfid
