// robustness.hpp
// Monte Carlo analysis of Gaussian fluctuations of the five circuit
// parameters around their optimal values.

#pragma once

#include "kerrsqueeze/errors.hpp"
#include "kerrsqueeze/metrics.hpp"
#include "kerrsqueeze/optimizer.hpp"
#include "kerrsqueeze/parallel.hpp"
#include "kerrsqueeze/prep.hpp"
#include "kerrsqueeze/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace kerrsqueeze {

using CircuitParams = std::array<double, 5>;
using ParamMask = std::array<bool, 5>;

inline constexpr double kSqueezeGuard = 1.5;
inline constexpr double kMaxFailureFraction = 0.01;
inline constexpr std::size_t kDefaultRuns = 10000;

// Circuit parameter names in tuple order.
inline std::array<std::string, 5> circuit_names(SweepKind kind) {
    if (kind == SweepKind::quartic) {
        return {"r", "chi", "phi1", "w", "phi2"};
    }
    return {"alpha", "chi", "phi", "beta", "r"};
}

struct FluctuationSpec {
    double gamma = 0.0;          // sigma_j = gamma * |mu_j|
    std::size_t n_runs = kDefaultRuns;
    ParamMask fixed{};           // true: held at mu
    std::uint64_t seed = 1;
};

struct SampledParams {
    CircuitParams values{};
    bool clamped = false;
};

struct MCStats {
    double mean_xi = 0.0;
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
    std::size_t n_plus = 0;
    std::size_t n_minus = 0;
    double frac_below_mean = 0.0;
    std::size_t n_runs = 0;     // successful runs
    std::size_t failures = 0;   // runs lost to truncation overflow
    std::size_t clamped = 0;    // runs with at least one clamped parameter
    std::vector<double> per_run_xi; // successful runs, in run order
};

inline void validate(const FluctuationSpec& spec) {
    if (!(spec.gamma >= 0.0) || !std::isfinite(spec.gamma)) {
        throw ConfigError("gamma must be a finite non-negative fraction");
    }
    if (spec.n_runs < 1) {
        throw ConfigError("n_runs must be at least 1");
    }
}

namespace detail {

// Gate guards: squeezing within +-kSqueezeGuard, initial energy parameter
// non-negative.
inline bool clamp_to_guards(SweepKind kind, CircuitParams& v) {
    bool clamped = false;
    auto clamp = [&](double& x, double lo, double hi) {
        const double c = std::clamp(x, lo, hi);
        clamped = clamped || c != x;
        x = c;
    };
    if (kind == SweepKind::quartic) {
        clamp(v[0], 0.0, kSqueezeGuard);
        clamp(v[3], -kSqueezeGuard, kSqueezeGuard);
    } else {
        clamp(v[0], 0.0, std::numeric_limits<double>::max());
        clamp(v[4], -kSqueezeGuard, kSqueezeGuard);
    }
    return clamped;
}

} // namespace detail

// Each parameter is N(mu_j, (gamma mu_j)^2) unless fixed.  Exactly five
// normals are drawn per run regardless of the mask, so a run's sample depends
// only on (seed, run_index).
inline SampledParams sample_params(const CircuitParams& mu, const FluctuationSpec& spec, std::size_t run_index,
                                   SweepKind kind = SweepKind::cubic) {
    StreamRng rng(spec.seed, 0x6d63ULL, run_index);
    SampledParams out{mu, false};
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double z = rng.normal();
        if (!spec.fixed[j]) {
            out.values[j] = mu[j] + spec.gamma * std::abs(mu[j]) * z;
        }
    }
    if (spec.gamma > 0.0) {
        out.clamped = detail::clamp_to_guards(kind, out.values);
    }
    return out;
}

// Squeezing ratio of the state prepared by the circuit.  The Gaussian stages
// after the Kerr gate are applied to the measured operator rather than to the
// state, so only the Kerr output has to fit in the truncated space.
inline double circuit_xi(SweepKind kind, const CircuitParams& v, std::size_t dim, KerrConvention convention) {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    if (kind == SweepKind::cubic) {
        const auto p = PrepParamsCubic::from_array(v);
        detail::require_finite({p.phi, p.beta, p.r}, "circuit_xi");
        const FockState zeta = zeta_cubic(p.alpha, p.chi, dim, convention);
        return make_report(3, v3_objective(zeta, std::exp(p.r), p.phi, p.beta)).xi;
    }
    if (kind == SweepKind::quartic) {
        const auto p = PrepParamsQuartic::from_array(v);
        detail::require_finite({p.phi1, p.w, p.phi2}, "circuit_xi");
        const FockState zeta = zeta_quartic(p.r, p.chi, dim, convention);
        return make_report(4, v4_objective(zeta, std::exp(p.w), kHalfPi - p.phi1, kHalfPi - p.phi2)).xi;
    }
    throw Error("Monte Carlo analysis supports the cubic and quartic circuits only");
}

// Same ratio from the fully prepared state.  Needs a larger dimension than
// circuit_xi when the final squeezing is strong.
inline double prepared_state_xi(SweepKind kind, const CircuitParams& v, std::size_t dim, KerrConvention convention) {
    if (kind == SweepKind::cubic) {
        return xi(prep_cubic(PrepParamsCubic::from_array(v), dim, convention), 3).xi;
    }
    if (kind == SweepKind::quartic) {
        return xi(prep_quartic(PrepParamsQuartic::from_array(v), dim, convention), 4).xi;
    }
    throw Error("Monte Carlo analysis supports the cubic and quartic circuits only");
}

namespace detail {

// Pairwise (cascade) summation; the split points depend only on the length.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace detail

// Aggregates per-run values: mean, one-sided deviations and counts.  The mean
// is accumulated relative to the first value so identical samples give an
// exact mean.
inline MCStats summarize(std::vector<double> values) {
    MCStats s;
    s.n_runs = values.size();
    if (values.empty()) {
        return s;
    }
    const double shift = values.front();
    std::vector<double> centred(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        centred[k] = values[k] - shift;
    }
    s.mean_xi = shift + detail::pairwise_sum(centred) / static_cast<double>(values.size());

    std::vector<double> up;
    std::vector<double> down;
    for (double v : values) {
        const double d = v - s.mean_xi;
        if (d > 0.0) {
            up.push_back(d * d);
        } else if (d < 0.0) {
            down.push_back(d * d);
        }
    }
    s.n_plus = up.size();
    s.n_minus = down.size();
    s.sigma_plus = up.empty() ? 0.0 : std::sqrt(detail::pairwise_sum(up) / static_cast<double>(up.size()));
    s.sigma_minus = down.empty() ? 0.0 : std::sqrt(detail::pairwise_sum(down) / static_cast<double>(down.size()));
    s.frac_below_mean = static_cast<double>(s.n_minus) / static_cast<double>(s.n_runs);
    s.per_run_xi = std::move(values);
    return s;
}

inline MCStats monte_carlo(SweepKind kind, const CircuitParams& mu, const FluctuationSpec& spec, std::size_t dim,
                           KerrConvention convention = KerrConvention::n_plus_one_squared) {
    validate(spec);
    if (kind == SweepKind::linear) {
        throw Error("Monte Carlo analysis supports the cubic and quartic circuits only");
    }
    struct Run {
        double xi = 0.0;
        bool failed = false;
        bool clamped = false;
    };
    std::vector<Run> runs(spec.n_runs);
    parallel_for(spec.n_runs, [&](std::size_t k) {
        const SampledParams sample = sample_params(mu, spec, k, kind);
        runs[k].clamped = sample.clamped;
        try {
            runs[k].xi = circuit_xi(kind, sample.values, dim, convention);
        } catch (const TruncationOverflow&) {
            runs[k].failed = true;
        }
    });

    std::vector<double> values;
    values.reserve(runs.size());
    std::size_t failures = 0;
    std::size_t clamped = 0;
    for (const auto& r : runs) {
        clamped += r.clamped ? 1 : 0;
        if (r.failed) {
            ++failures;
        } else {
            values.push_back(r.xi);
        }
    }
    if (static_cast<double>(failures) > kMaxFailureFraction * static_cast<double>(spec.n_runs)) {
        throw AnalysisFailed(std::to_string(failures) + " of " + std::to_string(spec.n_runs) +
                             " runs overflowed the truncated space");
    }
    MCStats stats = summarize(std::move(values));
    stats.failures = failures;
    stats.clamped = clamped;
    return stats;
}

// Same analysis with some parameters pinned at their optimal values.
inline MCStats monte_carlo_fixed(SweepKind kind, const CircuitParams& mu, const FluctuationSpec& spec, std::size_t dim,
                                 KerrConvention convention = KerrConvention::n_plus_one_squared) {
    return monte_carlo(kind, mu, spec, dim, convention);
}

inline ParamMask mask_for(SweepKind kind, const std::vector<std::string>& fixed_names) {
    ParamMask mask{};
    const auto names = circuit_names(kind);
    for (const auto& name : fixed_names) {
        bool found = false;
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (names[j] == name) {
                mask[j] = true;
                found = true;
            }
        }
        if (!found) {
            throw ConfigError("unknown parameter '" + name + "' for " + std::string(to_string(kind)));
        }
    }
    return mask;
}

} // namespace kerrsqueeze
