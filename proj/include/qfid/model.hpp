#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qfid/errors.hpp"
#include "qfid/summation.hpp"

namespace qfid {

enum class ModelVariant { Symmetric, Antisymmetric };

enum class Boundary { Periodic, Antiperiodic };

struct BoundaryAssignment {
    Boundary axis1 = Boundary::Periodic;
    Boundary axis2 = Boundary::Antiperiodic;
    // Exploratory runs only: accept axis1 == axis2. Such grids may hold
    // modes with cos k1 + cos k2 = 0, which are gapless on critical lines.
    bool allow_uniform = false;

    bool mixed() const noexcept { return axis1 != axis2; }
    void validate() const {
        if (!mixed() && !allow_uniform)
            throw ValidationError("uniform-boundary",
                                  "both axes share one boundary condition; set allow_uniform to override");
    }
    friend bool operator==(const BoundaryAssignment&, const BoundaryAssignment&) = default;
};

struct Momentum {
    double k1 = 0.0;
    double k2 = 0.0;
};

struct ModelParams {
    ModelVariant variant = ModelVariant::Symmetric;
    double mu = 0.0;
    double j = 0.0;
    int l = 2;
    BoundaryAssignment bc{};

    void validate() const;
};

inline void validate_size(int l) {
    if (l < 2 || l % 2 != 0)
        throw ValidationError("invalid-size", "L must be even and >= 2, got " + std::to_string(l));
}

inline void ModelParams::validate() const {
    validate_size(l);
    bc.validate();
    if (!std::isfinite(mu) || !std::isfinite(j))
        throw ValidationError("invalid-parameter", "mu and J must be finite");
}

struct ModeState {
    double eps = 0.0;
    double energy = 0.0;
    double u = 0.0;
    double v_abs = 0.0;
    double v_sign = 1.0;
};

// Kernels on cosines: every mode quantity depends on k only through cos k1, cos k2.
inline double epsilon_c(double c1, double c2, double mu) noexcept { return c1 + c2 - mu; }

inline double pairing_c(ModelVariant v, double c1, double c2) noexcept {
    return v == ModelVariant::Symmetric ? c1 + c2 : c1 - c2;
}

inline double epsilon(Momentum k, double mu) noexcept {
    return epsilon_c(std::cos(k.k1), std::cos(k.k2), mu);
}

inline double pairing_factor(ModelVariant v, Momentum k) noexcept {
    return pairing_c(v, std::cos(k.k1), std::cos(k.k2));
}

inline double quasiparticle_energy(const ModelParams& p, Momentum k) noexcept {
    const double e = epsilon(k, p.mu);
    const double g = p.j * pairing_factor(p.variant, k);
    return std::sqrt(e * e + g * g);
}

inline ModeState bogoliubov(const ModelParams& p, Momentum k) {
    ModeState s;
    s.eps = epsilon(k, p.mu);
    const double g = p.j * pairing_factor(p.variant, k);
    s.energy = std::sqrt(s.eps * s.eps + g * g);
    if (!(s.energy > 0.0))
        throw AccuracyError("gapless-mode", "E_k = 0 at k = (" + num_str(k.k1) + ", " +
                                                num_str(k.k2) + ")");
    // 1 +- eps/E computed without cancellation: (E +- eps)/E, with
    // E - |eps| = g^2/(E + |eps|).
    const double ae = std::abs(s.eps);
    const double big = (s.energy + ae) / s.energy;
    const double small = g * g / ((s.energy + ae) * s.energy);
    const double up = s.eps >= 0 ? big : small;
    const double dn = s.eps >= 0 ? small : big;
    s.u = std::sqrt(0.5 * up);
    s.v_abs = std::sqrt(0.5 * dn);
    s.v_sign = g < 0 ? -1.0 : 1.0;
    return s;
}

// One axis of the Brillouin grid.
inline std::vector<double> axis_values(int l, Boundary b) {
    validate_size(l);
    std::vector<double> k(static_cast<std::size_t>(l));
    const int shift = b == Boundary::Periodic ? 2 : 1;
    for (int m = 0; m < l; ++m)
        k[static_cast<std::size_t>(m)] = std::numbers::pi * (2.0 * m - l + shift) / l;
    return k;
}

// Axis folded onto [0, pi] by k -> -k. Weights add up to L.
struct FoldedAxis {
    std::vector<double> k;
    std::vector<double> cosk;
    std::vector<double> weight;
};

inline FoldedAxis fold_axis(int l, Boundary b) {
    validate_size(l);
    FoldedAxis a;
    const int h = l / 2;
    if (b == Boundary::Periodic) {
        for (int j = 0; j <= h; ++j) {
            a.k.push_back(2.0 * std::numbers::pi * j / l);
            a.weight.push_back(j == 0 || j == h ? 1.0 : 2.0);
        }
    } else {
        for (int j = 0; j < h; ++j) {
            a.k.push_back(std::numbers::pi * (2.0 * j + 1) / l);
            a.weight.push_back(2.0);
        }
    }
    // k = pi n / l; cos(pi - k) = -cos k kept exact so p -> -p pairs cancel
    a.cosk.reserve(a.k.size());
    for (std::size_t i = 0; i < a.k.size(); ++i) {
        const int n = b == Boundary::Periodic ? 2 * static_cast<int>(i) : 2 * static_cast<int>(i) + 1;
        if (2 * n == l)
            a.cosk.push_back(0.0);
        else if (2 * n < l)
            a.cosk.push_back(std::cos(std::numbers::pi * n / l));
        else
            a.cosk.push_back(-std::cos(std::numbers::pi * (l - n) / l));
    }
    return a;
}

// Axis lists only; the L^2 product is iterated, never stored.
class KGrid {
public:
    KGrid(int l, BoundaryAssignment bc) : l_(l), bc_(bc) {
        validate_size(l);
        bc.validate();
        k1_ = axis_values(l, bc.axis1);
        k2_ = axis_values(l, bc.axis2);
        f1_ = fold_axis(l, bc.axis1);
        f2_ = fold_axis(l, bc.axis2);
        min_abs_p_ = 1e300;
        for (double c1 : f1_.cosk)
            for (double c2 : f2_.cosk) min_abs_p_ = std::min(min_abs_p_, std::abs(c1 + c2));
        if (bc.mixed() && !(min_abs_p_ > 0.0))
            throw AccuracyError("grid-degeneracy", "cos k1 + cos k2 vanishes on a mixed grid");
    }

    int l() const noexcept { return l_; }
    const BoundaryAssignment& bc() const noexcept { return bc_; }
    const std::vector<double>& k1_values() const noexcept { return k1_; }
    const std::vector<double>& k2_values() const noexcept { return k2_; }
    const FoldedAxis& folded1() const noexcept { return f1_; }
    const FoldedAxis& folded2() const noexcept { return f2_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(l_) * l_; }
    // min over the grid of |cos k1 + cos k2|; zero only for uniform boundaries
    double min_abs_pairing_sum() const noexcept { return min_abs_p_; }

private:
    int l_;
    BoundaryAssignment bc_;
    std::vector<double> k1_, k2_;
    FoldedAxis f1_, f2_;
    double min_abs_p_;
};

inline KGrid build_k_grid(int l, BoundaryAssignment bc) { return KGrid(l, bc); }

// Sum over the folded grid of w1*w2*term(c1, c2); rows are compensated and
// combined pairwise.
template <class Term>
double grid_sum(const KGrid& g, int threads, Term&& term) {
    const auto& a = g.folded1();
    const auto& b = g.folded2();
    auto rows = map_indexed<double>(a.cosk.size(), threads, [&](std::size_t i) {
        CompensatedSum s;
        const double c1 = a.cosk[i];
        for (std::size_t m = 0; m < b.cosk.size(); ++m) s.add(b.weight[m] * term(c1, b.cosk[m]));
        return a.weight[i] * s.value();
    });
    return pairwise_sum(rows);
}

inline double ground_state_energy(const ModelParams& p, int threads = 1) {
    p.validate();
    KGrid g(p.l, p.bc);
    return grid_sum(g, threads, [&](double c1, double c2) {
        const double e = epsilon_c(c1, c2, p.mu);
        const double gp = p.j * pairing_c(p.variant, c1, c2);
        const double en = std::sqrt(e * e + gp * gp);
        // eps - E without cancellation when eps > 0
        return e > 0 ? -(gp * gp) / (e + en) : e - en;
    });
}

} // namespace qfid
