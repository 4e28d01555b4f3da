// minimize.hpp
// Bound-constrained quasi-Newton minimization (projected BFGS with central
// finite-difference gradients).

#pragma once

#include "kerrsqueeze/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace kerrsqueeze {

using Params = std::vector<double>;
using Objective = std::function<double(const Params&)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    double clamp(double v) const { return std::clamp(v, lo, hi); }
    double width() const { return hi - lo; }
};

using Bounds = std::vector<Interval>;

struct MinimizeOptions {
    double fd_step = 1e-6;
    double gradient_tolerance = 1e-7;
    std::size_t max_evaluations = 2000;
};

struct LocalResult {
    Params params;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_evals = 0;
    bool converged = false;
    double projected_gradient = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_bounds(const Params& x, const Bounds& bounds) {
    if (x.size() != bounds.size()) {
        throw DimensionMismatch("start point has " + std::to_string(x.size()) + " entries, bounds " +
                                std::to_string(bounds.size()));
    }
    for (const auto& b : bounds) {
        if (!(b.lo <= b.hi)) {
            throw Error("empty parameter interval");
        }
    }
}

class CountedObjective {
public:
    CountedObjective(const Objective& f, std::size_t budget) : f_(f), budget_(budget) {}

    double operator()(const Params& x) {
        ++count_;
        return f_(x);
    }
    std::size_t count() const { return count_; }
    bool exhausted() const { return count_ >= budget_; }

private:
    const Objective& f_;
    std::size_t budget_;
    std::size_t count_ = 0;
};

// Central differences, switching to a one-sided stencil against a bound.
inline Eigen::VectorXd fd_gradient(CountedObjective& f, const Params& x, double fx, const Bounds& bounds, double h) {
    const std::size_t k = x.size();
    Eigen::VectorXd g(static_cast<Eigen::Index>(k));
    Params probe = x;
    for (std::size_t i = 0; i < k; ++i) {
        const double step = h * std::max(1.0, std::abs(x[i]));
        const bool room_up = x[i] + step <= bounds[i].hi;
        const bool room_down = x[i] - step >= bounds[i].lo;
        double gi = 0.0;
        if (room_up && room_down) {
            probe[i] = x[i] + step;
            const double up = f(probe);
            probe[i] = x[i] - step;
            const double down = f(probe);
            gi = (up - down) / (2.0 * step);
        } else if (room_up) {
            probe[i] = x[i] + step;
            gi = (f(probe) - fx) / step;
        } else if (room_down) {
            probe[i] = x[i] - step;
            gi = (fx - f(probe)) / step;
        }
        probe[i] = x[i];
        g[static_cast<Eigen::Index>(i)] = gi;
    }
    return g;
}

inline Params project(const Eigen::VectorXd& v, const Bounds& bounds) {
    Params out(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        out[i] = bounds[i].clamp(v[static_cast<Eigen::Index>(i)]);
    }
    return out;
}

inline Eigen::VectorXd as_vector(const Params& p) {
    return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

// Infinity norm of P(x - g) - x.
inline double projected_gradient_norm(const Params& x, const Eigen::VectorXd& g, const Bounds& bounds) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double moved = bounds[i].clamp(x[i] - g[static_cast<Eigen::Index>(i)]);
        worst = std::max(worst, std::abs(moved - x[i]));
    }
    return worst;
}

} // namespace detail

// Minimizes f inside the box.  The returned point is never worse than the
// start.  Throws Error when f is not finite at the start.
inline LocalResult local_minimize(const Objective& objective, Params start, const Bounds& bounds,
                                  const MinimizeOptions& options = {}) {
    detail::check_bounds(start, bounds);
    for (std::size_t i = 0; i < start.size(); ++i) {
        if (!bounds[i].contains(start[i])) {
            throw Error("start point outside bounds");
        }
    }
    detail::CountedObjective f(objective, options.max_evaluations);
    const auto k = static_cast<Eigen::Index>(start.size());

    Params x = std::move(start);
    double fx = f(x);
    if (!std::isfinite(fx)) {
        throw Error("objective is not finite at the start point");
    }
    Eigen::VectorXd g = detail::fd_gradient(f, x, fx, bounds, options.fd_step);
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(k, k);

    LocalResult result;
    bool fresh_metric = true;
    while (true) {
        const double pg = detail::projected_gradient_norm(x, g, bounds);
        result.projected_gradient = pg;
        if (pg < options.gradient_tolerance) {
            result.converged = true;
            break;
        }
        if (f.exhausted()) {
            break;
        }

        // Variables held at a bound by the gradient are frozen for this step.
        std::vector<bool> active(static_cast<std::size_t>(k), false);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto& b = bounds[static_cast<std::size_t>(i)];
            const double xi = x[static_cast<std::size_t>(i)];
            active[static_cast<std::size_t>(i)] = (xi <= b.lo && g[i] > 0.0) || (xi >= b.hi && g[i] < 0.0);
        }
        Eigen::VectorXd d = -h_inv * g;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (active[static_cast<std::size_t>(i)]) {
                d[i] = 0.0;
            }
        }
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            h_inv.setIdentity();
            fresh_metric = true;
            d = -g;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (active[static_cast<std::size_t>(i)]) {
                    d[i] = 0.0;
                }
            }
            slope = g.dot(d);
            if (!(slope < 0.0)) {
                break;
            }
        }
        // First step of a fresh metric is scaled to a unit move.
        double t = 1.0;
        if (fresh_metric) {
            t = std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300));
        }

        const Eigen::VectorXd xv = detail::as_vector(x);
        Params trial;
        double ftrial = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 40 && !f.exhausted(); ++ls) {
            trial = detail::project(xv + t * d, bounds);
            ftrial = f(trial);
            const double decrease = g.dot(detail::as_vector(trial) - xv);
            if (std::isfinite(ftrial) && ftrial <= fx + 1e-4 * decrease && ftrial <= fx) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (fresh_metric) {
                break;
            }
            h_inv.setIdentity();
            fresh_metric = true;
            continue;
        }

        const Eigen::VectorXd s = detail::as_vector(trial) - xv;
        const Eigen::VectorXd g_new = detail::fd_gradient(f, trial, ftrial, bounds, options.fd_step);
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh_metric) {
                // Shanno scaling of the initial metric.
                h_inv *= sy / y.squaredNorm();
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
            h_inv = (id - rho * s * y.transpose()) * h_inv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
            fresh_metric = false;
        }
        const bool stalled = s.lpNorm<Eigen::Infinity>() == 0.0;
        x = std::move(trial);
        fx = ftrial;
        g = g_new;
        if (stalled) {
            break;
        }
    }
    result.params = std::move(x);
    result.value = fx;
    result.n_evals = f.count();
    return result;
}

} // namespace kerrsqueeze
