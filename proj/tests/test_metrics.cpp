#include "kerrsqueeze/metrics.hpp"
#include "kerrsqueeze/prep.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace kerrsqueeze;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

// var(x' - p'^2) for x' = g x, p' = p / g on vacuum, from Wick's theorem:
// var(x') = g^2/2, var(p'^2) = 2 var(p')^2, cov(x', p'^2) = 0.
double cubic_moment_formula(double g) {
    const double vp = 1.0 / (2.0 * g * g);
    return g * g / 2.0 + 2.0 * vp * vp;
}

// Same quantity evaluated in Fock space with dense matrices.
double dense_transformed_variance(const CVector& psi, const QuadratureForm& xq, const QuadratureForm& pq, int power) {
    const int dim = static_cast<int>(psi.size());
    const CMatrix x = xq.cx * dense_x(dim) + xq.cp * dense_p(dim) + xq.c0 * CMatrix::Identity(dim, dim);
    const CMatrix p = pq.cx * dense_x(dim) + pq.cp * dense_p(dim) + pq.c0 * CMatrix::Identity(dim, dim);
    CMatrix pk = CMatrix::Identity(dim, dim);
    for (int k = 0; k < power; ++k) {
        pk = pk * p;
    }
    return dense_variance(psi, x - pk);
}

} // namespace

TEST(NonlinearVariance, VacuumValues) {
    const FockState vac = FockState::vacuum(40);
    EXPECT_NEAR(nonlinear_variance(vac, 3), 1.0, 1e-9);
    EXPECT_NEAR(nonlinear_variance(vac, 4), 2.375, 1e-9);
    EXPECT_THROW(nonlinear_variance(vac, 2), Error);
    EXPECT_THROW(nonlinear_variance(vac, 5), Error);
}

TEST(NonlinearVariance, SixthMomentFromDenseProduct) {
    const int dim = 40;
    const CMatrix p = dense_p(dim);
    const CMatrix p6 = p * p * p * p * p * p;
    EXPECT_NEAR(p6(0, 0).real(), 15.0 / 8.0, 1e-12);
    // x - p^3 on vacuum: var(x) + <p^6>
    EXPECT_NEAR(0.5 + p6(0, 0).real(), nonlinear_variance(FockState::vacuum(dim), 4), 1e-12);
}

TEST(NonlinearVariance, MatchesDenseOnRandomStates) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const CVector psi = random_state(60, 40, rng);
        const FockState s = FockState::adopt(psi);
        EXPECT_NEAR(nonlinear_variance(s, 3), dense_transformed_variance(psi, kPosition, kMomentum, 2), 1e-10);
        EXPECT_NEAR(nonlinear_variance(s, 4), dense_transformed_variance(psi, kPosition, kMomentum, 3), 1e-9);
    }
}

TEST(LinearSqueezing, VacuumAndCoherentAreAtTheLimit) {
    EXPECT_NEAR(linear_min_eigenvalue(FockState::vacuum(30)), 0.5, 1e-12);
    EXPECT_NEAR(linear_min_eigenvalue(coherent_input(1.0, 60)), 0.5, 1e-10);
}

TEST(CubicBaseline, ClosedForm) {
    const auto b = gaussian_baseline(3);
    EXPECT_NEAR(b.variance, 3.0 * std::pow(2.0, -5.0 / 3.0), 1e-12);
    EXPECT_NEAR(b.variance, 0.944940, 1e-6);
    EXPECT_NEAR(b.g, std::pow(2.0, 1.0 / 6.0), 1e-15);
}

TEST(CubicBaseline, BruteForceScan) {
    double best = std::numeric_limits<double>::infinity();
    const int n = 2'000'000;
    for (int k = 0; k <= n; ++k) {
        const double g = 0.05 + (3.0 - 0.05) * k / n;
        best = std::min(best, cubic_moment_formula(g));
    }
    EXPECT_NEAR(gaussian_baseline(3).variance, best, 1e-6);
}

TEST(CubicBaseline, MomentFormulaMatchesFockSpace) {
    for (double g : {0.6, 1.0, 1.12, 1.7}) {
        const FockState s = apply(squeeze_operator(std::log(g), 120), FockState::vacuum(120));
        EXPECT_NEAR(nonlinear_variance(s, 3), cubic_moment_formula(g), 1e-9) << g;
        EXPECT_NEAR(cubic_gaussian_variance(g), cubic_moment_formula(g), 1e-12) << g;
    }
}

TEST(QuarticBaseline, ReportedSolution) {
    const auto b = gaussian_baseline(4);
    EXPECT_NEAR(b.variance, 0.971, 0.002);
    EXPECT_NEAR(b.g, -0.637, 0.005);
    EXPECT_NEAR(b.phi, -1.949, 0.005);
    EXPECT_NEAR(quartic_gaussian_variance(b.g, b.phi), b.variance, 1e-15);
}

TEST(QuarticBaseline, PolynomialMatchesFockSpace) {
    // x' = g cos x + sin p / g, p' = cos p / g - g sin x on vacuum
    const FockState vac = FockState::vacuum(40);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> gs(0.3, 2.0);
    std::uniform_real_distribution<double> phis(-kPi, kPi);
    for (int trial = 0; trial < 200; ++trial) {
        const double g = (trial % 2 ? -1.0 : 1.0) * gs(rng);
        const double phi = phis(rng);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const QuadratureForm xq{g * c, s / g, 0.0};
        const QuadratureForm pq{-g * s, c / g, 0.0};
        const double dense = dense_transformed_variance(vac.amplitudes(), xq, pq, 3);
        EXPECT_NEAR(quartic_gaussian_variance(g, phi), dense, 1e-9) << g << " " << phi;
    }
}

TEST(QuarticBaseline, GridScanOracle) {
    const int n = 2000;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double g = -3.0 + 6.0 * (i + 0.5) / n;
        if (std::abs(g) < 0.05) {
            continue;
        }
        for (int j = 0; j < n; ++j) {
            const double phi = -kPi + 2.0 * kPi * (j + 0.5) / n;
            best = std::min(best, quartic_gaussian_variance(g, phi));
        }
    }
    EXPECT_NEAR(gaussian_baseline(4).variance, best, 1e-3);
    EXPECT_LE(gaussian_baseline(4).variance, best + 1e-12);
}

TEST(QuarticBaseline, PolynomialSymmetries) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> gs(0.1, 2.5);
    std::uniform_real_distribution<double> phis(-kPi, kPi);
    for (int trial = 0; trial < 100; ++trial) {
        const double g = gs(rng);
        const double phi = phis(rng);
        const double v = quartic_gaussian_variance(g, phi);
        EXPECT_NEAR(quartic_gaussian_variance(-g, phi), v, 1e-9 * v);
        EXPECT_NEAR(quartic_gaussian_variance(g, phi + kPi), v, 1e-9 * v);
        EXPECT_NEAR(quartic_gaussian_variance(1.0 / g, phi - kPi / 2), v, 1e-9 * v);
    }
}

TEST(Baselines, AreLowerBoundsOverGaussianStates) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> rs(-1.0, 1.0);
    std::uniform_real_distribution<double> phis(-kPi, kPi);
    std::uniform_real_distribution<double> shifts(-1.0, 1.0);
    const std::size_t dim = 120;
    const double b3 = gaussian_baseline(3).variance;
    const double b4 = gaussian_baseline(4).variance;
    for (int trial = 0; trial < 1000; ++trial) {
        // centred Gaussians: rotation of squeezed vacuum, both moment orders
        const double r = rs(rng);
        const double phi = phis(rng);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double g = std::exp(r);
        const QuadratureForm xq{g * c, s / g, 0.0};
        const QuadratureForm pq{-g * s, c / g, 0.0};
        const CVector vac = FockState::vacuum(40).amplitudes();
        EXPECT_GE(transformed_variance(vac, xq, pq, 2), b3 - 1e-9);
        EXPECT_GE(transformed_variance(vac, xq, pq, 3), b4 - 1e-9);
        // displaced Gaussians for the cubic order
        if (trial % 10 == 0) {
            FockState st = apply(squeeze_operator(r * 0.5, dim), FockState::vacuum(dim));
            st = apply(gate_rotation(phi, dim), st);
            st = apply(gate_momentum_displacement(shifts(rng), dim), st);
            st = apply(gate_displacement(shifts(rng), dim), st);
            EXPECT_GE(nonlinear_variance(st, 3), b3 - 1e-9);
        }
    }
}

TEST(Report, RatioToBaseline) {
    const auto rep = make_report(3, 0.5);
    EXPECT_EQ(rep.order, 3);
    EXPECT_DOUBLE_EQ(rep.xi, 0.5 / gaussian_baseline(3).variance);
    const FockState vac = FockState::vacuum(30);
    EXPECT_NEAR(xi(vac, 4).xi, 2.375 / gaussian_baseline(4).variance, 1e-9);
    // the baseline state itself sits at xi = 1
    const FockState opt = apply(squeeze_operator(std::log(std::pow(2.0, 1.0 / 6.0)), 80), FockState::vacuum(80));
    EXPECT_NEAR(xi(opt, 3).xi, 1.0, 1e-9);
}

TEST(Objectives, SingularScalesRejected) {
    const CVector vac = FockState::vacuum(20).amplitudes();
    EXPECT_THROW(v3_objective(vac, 0.01, 0.0, 0.0), SingularParameter);
    EXPECT_THROW(v4_objective(vac, -0.02, 0.0, 0.0), SingularParameter);
    EXPECT_NO_THROW(v3_objective(vac, -0.5, 0.0, 0.0));
}

TEST(Objectives, TransformedQuadraturesStayCanonical) {
    // [x'', p''] = i on the interior subspace, for both transforms
    const int dim = 60;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_real_distribution<double> scale(0.2, 2.5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto [x3, p3] = cubic_transform(scale(rng), angle(rng), angle(rng));
        const auto [x4, p4] = quartic_transform(scale(rng), angle(rng), angle(rng));
        for (const auto& [xq, pq] : {std::pair{x3, p3}, std::pair{x4, p4}}) {
            const CMatrix xm = xq.matrix(dim);
            const CMatrix pm = pq.matrix(dim);
            const CMatrix comm = (xm * pm - pm * xm).topLeftCorner(dim - 1, dim - 1);
            EXPECT_LT((comm - Complex(0.0, 1.0) * CMatrix::Identity(dim - 1, dim - 1)).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(Objectives, OperatorPictureMatchesDense) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_real_distribution<double> scale(0.5, 1.8);
    const FockState zeta3 = zeta_cubic(1.3, 0.4, 80);
    const FockState zeta4 = zeta_quartic(0.4, 0.8, 80);
    for (int trial = 0; trial < 20; ++trial) {
        const double g = scale(rng);
        const double phi = angle(rng);
        const double beta = angle(rng) / 2;
        const auto [x3, p3] = cubic_transform(g, phi, beta);
        EXPECT_NEAR(v3_objective(zeta3, g, phi, beta), dense_transformed_variance(zeta3.amplitudes(), x3, p3, 2),
                    1e-9);
        const double w = scale(rng);
        const double a1 = angle(rng);
        const double a2 = angle(rng);
        const auto [x4, p4] = quartic_transform(w, a1, a2);
        EXPECT_NEAR(v4_objective(zeta4, w, a1, a2), dense_transformed_variance(zeta4.amplitudes(), x4, p4, 3), 1e-8);
    }
}
