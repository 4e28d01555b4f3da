// metrics.hpp
// Linear squeezing, nonlinear variances of O_n = x - p^(n-1), the Gaussian
// baselines that normalize them, and the transformed-operator objectives the
// optimizer minimizes.

#pragma once

#include "kerrsqueeze/errors.hpp"
#include "kerrsqueeze/fock.hpp"
#include "kerrsqueeze/minimize.hpp"
#include "kerrsqueeze/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace kerrsqueeze {

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kSingularScaleGuard = 0.05;

inline void require_order(int order) {
    if (order != 3 && order != 4) {
        throw Error("nonlinear squeezing order must be 3 or 4, got " + std::to_string(order));
    }
}

// ---------------------------------------------------------------------------
// Variances
// ---------------------------------------------------------------------------

inline double linear_min_eigenvalue(const FockState& state) { return variance_matrix(state).min_eigenvalue(); }

// Variance of X - P^power for X, P linear quadrature forms, on amplitudes psi.
inline double transformed_variance(const CVector& psi, const QuadratureForm& xq, const QuadratureForm& pq, int power) {
    CVector op;
    xq.apply(psi, op);
    CVector t = psi;
    CVector scratch;
    for (int k = 0; k < power; ++k) {
        pq.apply(t, scratch);
        t.swap(scratch);
    }
    op -= t;
    const double mean = psi.dot(op).real();
    return op.squaredNorm() - mean * mean;
}

inline double nonlinear_variance(const FockState& state, int order) {
    require_order(order);
    return transformed_variance(state.amplitudes(), kPosition, kMomentum, order - 1);
}

// ---------------------------------------------------------------------------
// Gaussian baselines
// ---------------------------------------------------------------------------

struct GaussianBaselineSolution {
    double g = 0.0;
    double phi = 0.0; // quartic only
    double variance = 0.0;
};

// var(x' - p'^2) on vacuum with x -> g x, p -> p / g.
inline double cubic_gaussian_variance(double g) { return g * g / 2.0 + 1.0 / (2.0 * std::pow(g, 4)); }

// var(x' - p'^3) on vacuum with x' = g cos x + sin p / g and
// p' = cos p / g - g sin x.  The cross term is -3 cov(x', p') var(p').
inline double quartic_gaussian_variance(double g, double phi) {
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    const double g2 = g * g;
    const double g4 = g2 * g2;
    const double g6 = g4 * g2;
    return g2 * c * c / 2.0 + s * s / (2.0 * g2)                              //
           + 1.5 * g4 * s * s * s * c + 1.5 * s * c * c * c                    //
           - 1.5 * s * s * s * c - 1.5 * c * c * c * s / g4                    //
           + 15.0 / 8.0 * std::pow(c, 6) / g6 + 45.0 / 8.0 * s * s * std::pow(c, 4) / g2 //
           + 45.0 / 8.0 * g2 * std::pow(s, 4) * c * c + 15.0 / 8.0 * g6 * std::pow(s, 6);
}

namespace detail {

inline GaussianBaselineSolution solve_quartic_baseline() {
    constexpr int kSeeds = 64;
    constexpr double kPi = std::numbers::pi;
    const Objective f = [](const Params& q) { return quartic_gaussian_variance(q[0], q[1]); };
    GaussianBaselineSolution best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    MinimizeOptions opts;
    opts.max_evaluations = 5000;
    for (int k = 0; k < kSeeds; ++k) {
        // half the seeds on each sign of g
        const bool negative = (k % 2) == 1;
        const Bounds bounds{negative ? Interval{-3.0, -kSingularScaleGuard} : Interval{kSingularScaleGuard, 3.0},
                            Interval{-kPi, kPi}};
        StreamRng rng(0x62617365ULL, 4, static_cast<std::uint64_t>(k));
        Params start{bounds[0].lo + bounds[0].width() * rng.uniform(), rng.uniform(-kPi, kPi)};
        const LocalResult r = local_minimize(f, start, bounds, opts);
        if (r.value < best.variance) {
            best = GaussianBaselineSolution{r.params[0], r.params[1], r.value};
        }
    }
    // The polynomial is even in g, pi-periodic in phi and invariant under
    // (g, phi) -> (1/g, phi - pi/2); report the representative with
    // -1 <= g < 0 and phi in [-pi, 0).
    if (std::abs(best.g) > 1.0) {
        best.g = 1.0 / best.g;
        best.phi -= kPi / 2.0;
    }
    best.g = -std::abs(best.g);
    best.phi = std::remainder(best.phi, kPi); // [-pi/2, pi/2]
    if (best.phi >= 0.0) {
        best.phi -= kPi;
    }
    best.variance = quartic_gaussian_variance(best.g, best.phi);
    return best;
}

} // namespace detail

inline GaussianBaselineSolution gaussian_baseline(int order) {
    require_order(order);
    if (order == 3) {
        const double g = std::pow(2.0, 1.0 / 6.0);
        return GaussianBaselineSolution{g, 0.0, cubic_gaussian_variance(g)};
    }
    static const GaussianBaselineSolution quartic = detail::solve_quartic_baseline();
    return quartic;
}

// ---------------------------------------------------------------------------
// Squeezing ratio
// ---------------------------------------------------------------------------

struct SqueezingReport {
    int order = 0;
    double raw_variance = 0.0;
    double baseline = 0.0;
    double xi = 0.0;
};

inline SqueezingReport make_report(int order, double raw_variance) {
    const double baseline = gaussian_baseline(order).variance;
    return SqueezingReport{order, raw_variance, baseline, raw_variance / baseline};
}

inline SqueezingReport xi(const FockState& state, int order) {
    return make_report(order, nonlinear_variance(state, order));
}

// ---------------------------------------------------------------------------
// Transformed-operator objectives
// ---------------------------------------------------------------------------

inline void require_scale(double s, const char* name) {
    if (!(std::abs(s) >= kSingularScaleGuard)) {
        throw SingularParameter(std::string(name) + " = " + std::to_string(s) + " is below the scaling guard");
    }
}

// x' = g (cos x + sin p),  p' = ((-sin x + cos p) + beta) / g
inline std::pair<QuadratureForm, QuadratureForm> cubic_transform(double g, double phi, double beta) {
    require_scale(g, "g");
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    return {QuadratureForm{g * c, g * s, 0.0}, QuadratureForm{-s / g, c / g, beta / g}};
}

// With u = sin1 x + cos1 p and v = -cos1 x + sin1 p:
//   x'' = omega sin2 u + cos2 v / omega
//   p'' = sin2 v / omega - omega cos2 u
inline std::pair<QuadratureForm, QuadratureForm> quartic_transform(double omega, double phi1, double phi2) {
    require_scale(omega, "omega");
    const double s1 = std::sin(phi1);
    const double c1 = std::cos(phi1);
    const double s2 = std::sin(phi2);
    const double c2 = std::cos(phi2);
    const double a = omega * s2; // weight of u in x''
    const double b = c2 / omega; // weight of v in x''
    const double e = s2 / omega; // weight of v in p''
    const double h = -omega * c2; // weight of u in p''
    return {QuadratureForm{a * s1 - b * c1, a * c1 + b * s1, 0.0},
            QuadratureForm{h * s1 - e * c1, h * c1 + e * s1, 0.0}};
}

inline double v3_objective(const CVector& zeta, double g, double phi, double beta) {
    const auto [xq, pq] = cubic_transform(g, phi, beta);
    return transformed_variance(zeta, xq, pq, 2);
}

inline double v3_objective(const FockState& zeta, double g, double phi, double beta) {
    return v3_objective(zeta.amplitudes(), g, phi, beta);
}

inline double v4_objective(const CVector& zeta, double omega, double phi1, double phi2) {
    const auto [xq, pq] = quartic_transform(omega, phi1, phi2);
    return transformed_variance(zeta, xq, pq, 3);
}

inline double v4_objective(const FockState& zeta, double omega, double phi1, double phi2) {
    return v4_objective(zeta.amplitudes(), omega, phi1, phi2);
}

} // namespace kerrsqueeze
