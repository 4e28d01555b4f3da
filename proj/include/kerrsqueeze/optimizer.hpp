// optimizer.hpp
// Multi-start minimization of the squeezing objectives at one energy point,
// and warm-start chained sweeps over a grid of energies.
//
// Free parameters per kind (in this order):
//   linear   (chi)                         objective: least variance-matrix eigenvalue
//   cubic    (chi, phi, beta, g)           objective: v3 on K(chi) D(alpha)|0>
//   quartic  (chi, phi1, omega, phi2)      objective: v4 on K(chi) S(r)|0>
//
// chi is only meaningful modulo the symmetries of the Kerr phase, so its
// bounds are one fundamental cell of the effective n^2 strength
// theta = chi * kerr_strength_factor(convention):
//   linear, cubic: theta in [0, pi/2]   (period pi up to a rotation, plus the
//                                        mirror theta -> -theta)
//   quartic:       theta in [pi/8, 3pi/8] (even inputs: period pi/4 up to a
//                                        rotation; the cell is centred on the
//                                        Gaussian point theta = pi/4)

#pragma once

#include "kerrsqueeze/errors.hpp"
#include "kerrsqueeze/fock.hpp"
#include "kerrsqueeze/metrics.hpp"
#include "kerrsqueeze/minimize.hpp"
#include "kerrsqueeze/parallel.hpp"
#include "kerrsqueeze/prep.hpp"
#include "kerrsqueeze/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kerrsqueeze {

inline constexpr std::size_t kDefaultStarts = 300;

enum class SweepKind { linear, cubic, quartic };

inline std::string_view to_string(SweepKind k) {
    switch (k) {
    case SweepKind::linear:
        return "linear";
    case SweepKind::cubic:
        return "cubic";
    case SweepKind::quartic:
        return "quartic";
    }
    return "?";
}

inline SweepKind parse_kind(std::string_view s) {
    if (s == "linear") {
        return SweepKind::linear;
    }
    if (s == "cubic") {
        return SweepKind::cubic;
    }
    if (s == "quartic") {
        return SweepKind::quartic;
    }
    throw ConfigError("unknown kind '" + std::string(s) + "' (expected linear, cubic or quartic)");
}

inline int squeezing_order(SweepKind k) {
    switch (k) {
    case SweepKind::linear:
        return 2;
    case SweepKind::cubic:
        return 3;
    case SweepKind::quartic:
        return 4;
    }
    return 0;
}

inline std::vector<std::string> param_names(SweepKind k) {
    switch (k) {
    case SweepKind::linear:
        return {"chi"};
    case SweepKind::cubic:
        return {"chi", "phi", "beta", "g"};
    case SweepKind::quartic:
        return {"chi", "phi1", "omega", "phi2"};
    }
    return {};
}

inline Interval kerr_bounds(SweepKind k, KerrConvention convention) {
    constexpr double kPi = std::numbers::pi;
    const double unit = 1.0 / kerr_strength_factor(convention);
    if (k == SweepKind::quartic) {
        return {unit * kPi / 8.0, unit * 3.0 * kPi / 8.0};
    }
    return {0.0, unit * kPi / 2.0};
}

inline Bounds default_bounds(SweepKind k, KerrConvention convention) {
    constexpr double kPi = std::numbers::pi;
    const Interval chi = kerr_bounds(k, convention);
    const Interval angle{-kPi, kPi};
    const Interval scale{kSingularScaleGuard, 3.0};
    switch (k) {
    case SweepKind::linear:
        return {chi};
    case SweepKind::cubic:
        return {chi, angle, Interval{-5.0, 5.0}, scale};
    case SweepKind::quartic:
        return {chi, angle, scale, angle};
    }
    return {};
}

// Range of the primary parameter (alpha or r) accepted by sweeps.
inline Interval primary_range(SweepKind k) {
    if (k == SweepKind::quartic) {
        return {0.0, 1.2};
    }
    return {0.0, 5.0};
}

struct OptProblem {
    SweepKind kind = SweepKind::cubic;
    double primary_param = 0.0;
    Bounds bounds;
    std::size_t n_starts = kDefaultStarts;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0; // grid index; keys the random starts
    std::size_t dim = kDefaultDim;
    KerrConvention convention = KerrConvention::n_plus_one_squared;
    MinimizeOptions minimize;
};

struct OptimalPoint {
    double primary_param = 0.0;
    Params best_params;
    double objective = 0.0;
    double xi = 0.0;
    std::size_t n_evals = 0;
    std::size_t n_rejected = 0;
};

inline OptProblem make_problem(SweepKind kind, double primary, std::size_t dim, KerrConvention convention,
                               std::size_t n_starts, std::uint64_t seed, std::uint64_t stream = 0) {
    OptProblem p;
    p.kind = kind;
    p.primary_param = primary;
    p.bounds = default_bounds(kind, convention);
    p.n_starts = n_starts;
    p.seed = seed;
    p.stream = stream;
    p.dim = dim;
    p.convention = convention;
    return p;
}

inline double xi_from_objective(SweepKind kind, double objective) {
    if (kind == SweepKind::linear) {
        return objective / kVacuumVariance;
    }
    return objective / gaussian_baseline(squeezing_order(kind)).variance;
}

// Objective in the kind's free parameters.  The Kerr-free input state is
// prepared once; each evaluation applies the diagonal Kerr gate and
// evaluates the moments in O(dim).
inline Objective make_objective(SweepKind kind, double primary, std::size_t dim, KerrConvention convention) {
    switch (kind) {
    case SweepKind::linear: {
        CVector input = coherent_input(primary, dim).amplitudes();
        return [input = std::move(input), convention](const Params& q) {
            CVector z = input;
            apply_kerr_inplace(z, q[0], convention);
            return linear_min_eigenvalue(FockState::adopt(std::move(z)));
        };
    }
    case SweepKind::cubic: {
        CVector input = coherent_input(primary, dim).amplitudes();
        return [input = std::move(input), convention](const Params& q) {
            CVector z = input;
            apply_kerr_inplace(z, q[0], convention);
            return v3_objective(z, q[3], q[1], q[2]);
        };
    }
    case SweepKind::quartic: {
        CVector input = squeezed_input(primary, dim).amplitudes();
        return [input = std::move(input), convention](const Params& q) {
            CVector z = input;
            apply_kerr_inplace(z, q[0], convention);
            return v4_objective(z, q[2], q[1], q[3]);
        };
    }
    }
    throw Error("unknown kind");
}

// Quartic angles have period pi (both flip the sign of O_4); report the
// representative in (-pi/2, pi/2].
inline Params canonical_params(SweepKind kind, Params q) {
    if (kind == SweepKind::quartic) {
        for (std::size_t i : {std::size_t{1}, std::size_t{3}}) {
            double a = std::remainder(q[i], std::numbers::pi);
            if (a <= -std::numbers::pi / 2.0) {
                a += std::numbers::pi;
            }
            q[i] = a;
        }
    }
    return q;
}

namespace detail {

struct StartOutcome {
    bool rejected = true;
    LocalResult result;
    std::string error;
};

inline Params random_start(const OptProblem& p, std::size_t index) {
    StreamRng rng(p.seed, p.stream, index);
    Params q(p.bounds.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = p.bounds[i].lo + p.bounds[i].width() * rng.uniform();
    }
    return q;
}

inline Params clamp_into(Params q, const Bounds& bounds) {
    if (q.size() != bounds.size()) {
        throw DimensionMismatch("warm start has the wrong number of parameters");
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = bounds[i].clamp(q[i]);
    }
    return q;
}

inline Objective guarded(Objective f) {
    return [f = std::move(f)](const Params& q) {
        try {
            return f(q);
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
}

inline StartOutcome run_start(const Objective& f, const OptProblem& p, Params start) {
    StartOutcome out;
    try {
        out.result = local_minimize(f, std::move(start), p.bounds, p.minimize);
        out.rejected = !std::isfinite(out.result.value);
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

// Starts for indices [first, n_starts), index i always drawn from stream i.
inline std::vector<StartOutcome> run_random_starts(const Objective& f, const OptProblem& p, std::size_t first) {
    std::vector<StartOutcome> outcomes(p.n_starts > first ? p.n_starts - first : 0);
    parallel_for(outcomes.size(), [&](std::size_t k) { outcomes[k] = run_start(f, p, random_start(p, first + k)); });
    return outcomes;
}

inline bool better(const LocalResult& a, const LocalResult& b) {
    if (std::abs(a.value - b.value) < 1e-12) {
        return detail::as_vector(a.params).norm() < detail::as_vector(b.params).norm();
    }
    return a.value < b.value;
}

// Deterministic reduction in index order: lowest objective, ties within 1e-12
// broken by the smaller parameter norm, then by the lower index.
inline OptimalPoint reduce(const OptProblem& p, const Objective& f, const StartOutcome& first,
                           const std::vector<StartOutcome>& rest) {
    const LocalResult* best = nullptr;
    std::size_t evals = 0;
    std::size_t rejected = 0;
    std::string last_error;
    auto consider = [&](const StartOutcome& o) {
        evals += o.result.n_evals;
        if (o.rejected) {
            ++rejected;
            if (!o.error.empty()) {
                last_error = o.error;
            }
            return;
        }
        if (best == nullptr || better(o.result, *best)) {
            best = &o.result;
        }
    };
    consider(first);
    for (const auto& o : rest) {
        consider(o);
    }
    if (best == nullptr) {
        throw OptimizationFailed("all " + std::to_string(rejected) + " starts rejected for " +
                                 std::string(to_string(p.kind)) + " at " + std::to_string(p.primary_param) +
                                 (last_error.empty() ? std::string() : ": " + last_error));
    }
    OptimalPoint point;
    point.primary_param = p.primary_param;
    point.best_params = canonical_params(p.kind, best->params);
    point.objective = f(point.best_params);
    point.xi = xi_from_objective(p.kind, point.objective);
    point.n_evals = evals;
    point.n_rejected = rejected;
    return point;
}

inline void check_problem(const OptProblem& p) {
    if (p.n_starts < 1) {
        throw ConfigError("n_starts must be at least 1");
    }
    if (p.bounds.size() != param_names(p.kind).size()) {
        throw ConfigError("bounds do not match the parameter count of " + std::string(to_string(p.kind)));
    }
    for (const auto& b : p.bounds) {
        if (!(b.lo <= b.hi)) {
            throw ConfigError("empty parameter interval");
        }
    }
}

} // namespace detail

// Best of n_starts local minimizations.  Start 0 is the warm start when one
// is given (clamped into the bounds), otherwise random; starts 1.. are random.
inline OptimalPoint optimize_point(const OptProblem& problem, const std::optional<Params>& warm_start = std::nullopt) {
    detail::check_problem(problem);
    const Objective f = detail::guarded(make_objective(problem.kind, problem.primary_param, problem.dim, problem.convention));
    const auto rest = detail::run_random_starts(f, problem, 1);
    const Params start0 = warm_start ? detail::clamp_into(*warm_start, problem.bounds) : detail::random_start(problem, 0);
    const auto first = detail::run_start(f, problem, start0);
    return detail::reduce(problem, f, first, rest);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::size_t dim = kDefaultDim;
    KerrConvention convention = KerrConvention::n_plus_one_squared;
    std::size_t n_starts = kDefaultStarts;
    std::uint64_t seed = 1;
    std::optional<Bounds> bounds; // defaults per kind when empty
    MinimizeOptions minimize;
};

struct SweepFailure {
    double primary_param = 0.0;
    std::string message;
};

struct SweepResult {
    SweepKind kind = SweepKind::cubic;
    std::size_t dim = 0;
    KerrConvention convention = KerrConvention::n_plus_one_squared;
    std::uint64_t seed = 0;
    std::vector<OptimalPoint> points;
    std::vector<SweepFailure> failures;
};

inline std::vector<double> validate_grid(SweepKind kind, std::vector<double> grid) {
    if (grid.empty()) {
        throw ConfigError("sweep grid is empty");
    }
    const Interval range = primary_range(kind);
    constexpr double kEdgeSlack = 1e-9; // absorbs decimal grid rounding such as 12 * 0.1
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isfinite(grid[i]) && std::abs(grid[i] - range.hi) < kEdgeSlack) {
            grid[i] = std::min(grid[i], range.hi);
        }
        if (!std::isfinite(grid[i]) || !range.contains(grid[i])) {
            throw ConfigError("grid value " + std::to_string(grid[i]) + " outside [" + std::to_string(range.lo) +
                              ", " + std::to_string(range.hi) + "]");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw ConfigError("sweep grid must be strictly increasing");
        }
    }
    return grid;
}

// Warm-start chain in grid order.  The random starts of every point do not
// depend on the chain, so they all run up front in parallel; the chained
// start of point i then waits only for point i-1.
inline SweepResult sweep(SweepKind kind, const std::vector<double>& grid_in, const SweepConfig& config) {
    const std::vector<double> grid = validate_grid(kind, grid_in);
    std::vector<OptProblem> problems;
    problems.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        OptProblem p = make_problem(kind, grid[i], config.dim, config.convention, config.n_starts, config.seed, i);
        if (config.bounds) {
            p.bounds = *config.bounds;
        }
        p.minimize = config.minimize;
        detail::check_problem(p);
        problems.push_back(std::move(p));
    }

    std::vector<std::optional<Objective>> objectives(grid.size());
    std::vector<std::string> setup_errors(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            objectives[i] = detail::guarded(make_objective(kind, grid[i], config.dim, config.convention));
        } catch (const Error& e) {
            setup_errors[i] = e.what();
        }
    }

    // Flatten (point, start) pairs for the random starts.
    const std::size_t per_point = config.n_starts > 1 ? config.n_starts - 1 : 0;
    std::vector<detail::StartOutcome> random(grid.size() * per_point);
    parallel_for(random.size(), [&](std::size_t k) {
        const std::size_t i = k / per_point;
        const std::size_t s = 1 + k % per_point;
        if (objectives[i]) {
            random[k] = detail::run_start(*objectives[i], problems[i], detail::random_start(problems[i], s));
        }
    });

    SweepResult result{kind, config.dim, config.convention, config.seed, {}, {}};
    std::optional<Params> warm;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!objectives[i]) {
            result.failures.push_back({grid[i], setup_errors[i]});
            warm.reset();
            continue;
        }
        const auto& p = problems[i];
        const Params start0 = warm ? detail::clamp_into(*warm, p.bounds) : detail::random_start(p, 0);
        const auto first = detail::run_start(*objectives[i], p, start0);
        const std::vector<detail::StartOutcome> rest(random.begin() + static_cast<std::ptrdiff_t>(i * per_point),
                                                     random.begin() + static_cast<std::ptrdiff_t>((i + 1) * per_point));
        try {
            OptimalPoint point = detail::reduce(p, *objectives[i], first, rest);
            warm = point.best_params;
            result.points.push_back(std::move(point));
        } catch (const OptimizationFailed& e) {
            result.failures.push_back({grid[i], e.what()});
            warm.reset();
        }
    }
    return result;
}

// Circuit parameters realizing an optimal point.
inline PrepParamsCubic cubic_circuit(const OptimalPoint& pt) {
    const auto& q = pt.best_params;
    return cubic_circuit(pt.primary_param, q[0], q[3], q[1], q[2]);
}

inline PrepParamsQuartic quartic_circuit(const OptimalPoint& pt) {
    const auto& q = pt.best_params;
    return quartic_circuit(pt.primary_param, q[0], q[2], q[1], q[3]);
}

} // namespace kerrsqueeze
