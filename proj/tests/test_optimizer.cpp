#include "kerrsqueeze/optimizer.hpp"
#include "kerrsqueeze/robustness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace kerrsqueeze;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr auto kDefaultConv = KerrConvention::n_plus_one_squared;

double grid_minimum(const Objective& f, const Bounds& b, int per_axis) {
    double best = std::numeric_limits<double>::infinity();
    Params q(b.size());
    std::vector<int> idx(b.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < b.size(); ++i) {
            q[i] = b[i].lo + b[i].width() * idx[i] / (per_axis - 1);
        }
        try {
            best = std::min(best, f(q));
        } catch (const Error&) {
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == per_axis) {
            idx[k++] = 0;
        }
        if (k == idx.size()) {
            return best;
        }
    }
}

} // namespace

TEST(Optimizer, BoundsAndNames) {
    EXPECT_EQ(param_names(SweepKind::cubic).size(), 4u);
    EXPECT_EQ(param_names(SweepKind::quartic).size(), 4u);
    EXPECT_EQ(param_names(SweepKind::linear).size(), 1u);
    const Interval q = kerr_bounds(SweepKind::quartic, KerrConvention::two_n_plus_one_squared);
    EXPECT_NEAR(q.lo, kPi / 32, 1e-15);
    EXPECT_NEAR(q.hi, 3 * kPi / 32, 1e-15);
    EXPECT_NEAR(kerr_bounds(SweepKind::cubic, kDefaultConv).hi, kPi / 2, 1e-15);
    EXPECT_EQ(parse_kind("quartic"), SweepKind::quartic);
    EXPECT_THROW(parse_kind("quintic"), ConfigError);
}

TEST(Optimizer, GridValidation) {
    EXPECT_THROW(validate_grid(SweepKind::cubic, {}), ConfigError);
    EXPECT_THROW(validate_grid(SweepKind::cubic, {0.5, 0.5}), ConfigError);
    EXPECT_THROW(validate_grid(SweepKind::cubic, {0.5, 0.4}), ConfigError);
    EXPECT_THROW(validate_grid(SweepKind::quartic, {1.3}), ConfigError);
    EXPECT_THROW(validate_grid(SweepKind::cubic, {-0.1}), ConfigError);
    EXPECT_THROW(validate_grid(SweepKind::cubic, {std::nan("")}), ConfigError);
    EXPECT_EQ(validate_grid(SweepKind::quartic, {12 * 0.1}).back(), 1.2);
    SweepConfig cfg;
    cfg.dim = 60;
    cfg.n_starts = 0;
    EXPECT_THROW(sweep(SweepKind::cubic, {0.5}, cfg), ConfigError);
}

TEST(Optimizer, CanonicalQuarticAngles) {
    const Params q = canonical_params(SweepKind::quartic, {0.3, 2.0, 1.1, -1.7});
    EXPECT_NEAR(q[1], 2.0 - kPi, 1e-15);
    EXPECT_NEAR(q[3], -1.7 + kPi, 1e-15);
    EXPECT_EQ(q[0], 0.3);
    EXPECT_EQ(q[2], 1.1);
    // the objective is unchanged by the reduction
    const Objective f = make_objective(SweepKind::quartic, 0.5, 100, kDefaultConv);
    EXPECT_NEAR(f(q), f({0.3, 2.0, 1.1, -1.7}), 1e-12);
}

TEST(Optimizer, DeterministicAcrossCalls) {
    const OptProblem p = make_problem(SweepKind::cubic, 1.0, 100, kDefaultConv, 12, 7, 3);
    const OptimalPoint a = optimize_point(p);
    const OptimalPoint b = optimize_point(p);
    EXPECT_EQ(a.best_params, b.best_params);
    EXPECT_EQ(a.xi, b.xi);
    EXPECT_EQ(a.n_evals, b.n_evals);
}

TEST(Optimizer, WarmStartNeverHurts) {
    for (auto kind : {SweepKind::cubic, SweepKind::quartic}) {
        const double primary = kind == SweepKind::cubic ? 1.6 : 0.6;
        const OptProblem p = make_problem(kind, primary, 100, kDefaultConv, 6, 11);
        const OptimalPoint cold = optimize_point(p);
        const OptimalPoint warm = optimize_point(p, cold.best_params);
        EXPECT_LE(warm.objective, cold.objective + 1e-12);
        // the result is never worse than the (clamped) warm start itself
        const Params poor = detail::clamp_into({0.0, 0.0, 0.0, 0.0}, p.bounds);
        const Objective f = make_objective(kind, primary, 100, kDefaultConv);
        EXPECT_LE(optimize_point(p, poor).objective, f(poor));
    }
}

TEST(Optimizer, BeatsCoarseGridScan) {
    for (auto kind : {SweepKind::cubic, SweepKind::quartic}) {
        const double primary = kind == SweepKind::cubic ? 1.0 : 0.5;
        const std::size_t dim = 100;
        OptProblem p = make_problem(kind, primary, dim, kDefaultConv, 40, 1);
        const OptimalPoint best = optimize_point(p);
        const double scan = grid_minimum(make_objective(kind, primary, dim, kDefaultConv), p.bounds, 11);
        EXPECT_LE(best.objective, scan + 1e-6) << to_string(kind);
    }
}

TEST(Optimizer, LinearReachesVacuumAtZeroKerr) {
    OptProblem p = make_problem(SweepKind::linear, 1.5, 100, kDefaultConv, 4, 1);
    p.bounds = {{0.0, 0.0}};
    EXPECT_NEAR(optimize_point(p).xi, 1.0, 1e-9);
    p.bounds = default_bounds(SweepKind::linear, kDefaultConv);
    p.n_starts = 40;
    const double scan = grid_minimum(make_objective(SweepKind::linear, 1.5, 100, kDefaultConv), p.bounds, 20001);
    EXPECT_LE(optimize_point(p).objective, scan + 1e-9);
}

TEST(Optimizer, KerrConventionsAgree) {
    // K_(2n+1)^2(chi) equals K_(n+1)^2(4 chi) up to a rotation, which the
    // free angle absorbs.
    const double alpha = 1.2;
    const std::size_t dim = 100;
    for (double chi : {0.02, 0.05, 0.1}) {
        OptProblem a = make_problem(SweepKind::cubic, alpha, dim, KerrConvention::two_n_plus_one_squared, 12, 2);
        a.bounds[0] = {chi, chi};
        OptProblem b = make_problem(SweepKind::cubic, alpha, dim, KerrConvention::n_plus_one_squared, 12, 2);
        b.bounds[0] = {4 * chi, 4 * chi};
        EXPECT_NEAR(optimize_point(a).xi, optimize_point(b).xi, 1e-6) << chi;
    }
}

TEST(Optimizer, ConvergedInDimension) {
    for (auto kind : {SweepKind::cubic, SweepKind::quartic}) {
        const double primary = kind == SweepKind::cubic ? 2.0 : 0.8;
        const OptimalPoint lo = optimize_point(make_problem(kind, primary, 120, kDefaultConv, 20, 4));
        const OptimalPoint hi = optimize_point(make_problem(kind, primary, 170, kDefaultConv, 20, 4), lo.best_params);
        EXPECT_NEAR(lo.xi, hi.xi, 1e-6) << to_string(kind);
    }
}

TEST(Optimizer, SweepChainsAndRecordsFailures) {
    SweepConfig cfg;
    cfg.dim = 30;
    cfg.n_starts = 4;
    // alpha = 4.5 overflows a 30-level basis and is reported, not thrown
    const SweepResult r = sweep(SweepKind::cubic, {0.5, 1.0, 4.5}, cfg);
    ASSERT_EQ(r.points.size(), 2u);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].primary_param, 4.5);
    for (const auto& pt : r.points) {
        EXPECT_LT(pt.xi, 1.0);
        EXPECT_EQ(pt.best_params.size(), 4u);
    }
}

TEST(Optimizer, CircuitFromOptimum) {
    const OptimalPoint pt = optimize_point(make_problem(SweepKind::quartic, 0.6, 120, kDefaultConv, 8, 1));
    const PrepParamsQuartic c = quartic_circuit(pt);
    EXPECT_EQ(c.r, 0.6);
    EXPECT_EQ(c.chi, pt.best_params[0]);
    EXPECT_NEAR(circuit_xi(SweepKind::quartic, c.as_array(), 120, kDefaultConv), pt.xi, 1e-9);
    EXPECT_NEAR(circuit_xi(SweepKind::quartic, c.as_array(), 200, kDefaultConv), pt.xi, 1e-6);
    // the fully prepared state is strongly squeezed and converges more slowly
    EXPECT_NEAR(xi(prep_quartic(c, 300), 4).xi, pt.xi, 1e-5);
}

TEST(Optimizer, WarmStartBeatsRemainingStartsAlone) {
    // Best of (warm start + starts 1..n-1) never loses to starts 1..n-1 alone.
    SweepConfig cfg;
    cfg.dim = 100;
    cfg.n_starts = 8;
    const SweepResult r = sweep(SweepKind::cubic, {0.6, 0.8, 1.0, 1.2}, cfg);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        const OptProblem p = make_problem(SweepKind::cubic, r.points[i].primary_param, cfg.dim, cfg.convention,
                                          cfg.n_starts, cfg.seed, i);
        const Objective f = detail::guarded(make_objective(p.kind, p.primary_param, p.dim, p.convention));
        const auto rest = detail::run_random_starts(f, p, 1);
        const auto best_rest = std::min_element(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
            return !a.rejected && (b.rejected || a.result.value < b.result.value);
        });
        EXPECT_LE(r.points[i].objective, best_rest->result.value + 1e-12);
    }
}
