// prep.hpp
// The three single-Kerr preparation circuits, applied gate by gate to the
// vacuum (right-most gate first):
//   linear   K(chi) D(alpha) |0>
//   cubic    S(r) Dp(beta) R(phi) K(chi) D(alpha) |0>
//   quartic  R(phi2) S(w) R(phi1) K(chi) S(r) |0>
// The cubic post-Kerr displacement Dp(beta) acts on the momentum quadrature;
// an x displacement there would only shift O_3 by a constant.

#pragma once

#include "kerrsqueeze/errors.hpp"
#include "kerrsqueeze/fock.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace kerrsqueeze {

struct PrepParamsLinear {
    double alpha = 0.0;
    double chi = 0.0;
};

struct PrepParamsCubic {
    double alpha = 0.0;
    double chi = 0.0;
    double phi = 0.0;
    double beta = 0.0;
    double r = 0.0;

    std::array<double, 5> as_array() const { return {alpha, chi, phi, beta, r}; }
    static PrepParamsCubic from_array(const std::array<double, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
};

struct PrepParamsQuartic {
    double r = 0.0;
    double chi = 0.0;
    double phi1 = 0.0;
    double w = 0.0;
    double phi2 = 0.0;

    std::array<double, 5> as_array() const { return {r, chi, phi1, w, phi2}; }
    static PrepParamsQuartic from_array(const std::array<double, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
};

// Angle in (-pi, pi].
inline double wrap_angle(double phi) {
    double w = std::remainder(phi, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) {
        w += 2.0 * std::numbers::pi;
    }
    return w;
}

namespace detail {

inline void require_finite(std::initializer_list<double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(std::string(what) + ": non-finite parameter");
        }
    }
}

} // namespace detail

inline FockState coherent_input(double alpha, std::size_t dim) {
    FockState s = apply(gate_displacement(alpha, dim), FockState::vacuum(dim));
    s.require_faithful("displacement alpha=" + std::to_string(alpha));
    return s;
}

inline FockState squeezed_input(double r, std::size_t dim) {
    FockState s = apply(squeeze_operator(r, dim), FockState::vacuum(dim));
    s.require_faithful("squeeze r=" + std::to_string(r));
    return s;
}

inline FockState prep_linear(const PrepParamsLinear& p, std::size_t dim,
                             KerrConvention convention = KerrConvention::n_plus_one_squared) {
    detail::require_finite({p.alpha, p.chi}, "prep_linear");
    return apply(gate_kerr(p.chi, dim, convention), coherent_input(p.alpha, dim));
}

// zeta_3 = K(chi) D(alpha)|0>
inline FockState zeta_cubic(double alpha, double chi, std::size_t dim,
                            KerrConvention convention = KerrConvention::n_plus_one_squared) {
    return prep_linear({alpha, chi}, dim, convention);
}

// zeta_4 = K(chi) S(r)|0>
inline FockState zeta_quartic(double r, double chi, std::size_t dim,
                              KerrConvention convention = KerrConvention::n_plus_one_squared) {
    detail::require_finite({r, chi}, "zeta_quartic");
    return apply(gate_kerr(chi, dim, convention), squeezed_input(r, dim));
}

inline FockState prep_cubic(const PrepParamsCubic& p, std::size_t dim,
                            KerrConvention convention = KerrConvention::n_plus_one_squared) {
    detail::require_finite({p.alpha, p.chi, p.phi, p.beta, p.r}, "prep_cubic");
    FockState s = zeta_cubic(p.alpha, p.chi, dim, convention);
    s = apply(gate_rotation(p.phi, dim), s);
    s = apply(gate_momentum_displacement(p.beta, dim), s);
    s = apply(squeeze_operator(p.r, dim), s);
    s.require_faithful("prep_cubic");
    return s;
}

inline FockState prep_quartic(const PrepParamsQuartic& p, std::size_t dim,
                              KerrConvention convention = KerrConvention::n_plus_one_squared) {
    detail::require_finite({p.r, p.chi, p.phi1, p.w, p.phi2}, "prep_quartic");
    FockState s = zeta_quartic(p.r, p.chi, dim, convention);
    s = apply(gate_rotation(p.phi1, dim), s);
    s = apply(squeeze_operator(p.w, dim), s);
    s = apply(gate_rotation(p.phi2, dim), s);
    s.require_faithful("prep_quartic");
    return s;
}

// ---------------------------------------------------------------------------
// Objective parametrization -> circuit parameters
// ---------------------------------------------------------------------------

// (g, phi, beta) of the cubic objective as circuit gates.  Negative g is the
// same transform as (|g|, phi + pi, -beta).
inline PrepParamsCubic cubic_circuit(double alpha, double chi, double g, double phi, double beta) {
    if (g < 0.0) {
        return {alpha, chi, wrap_angle(phi + std::numbers::pi), -beta, std::log(-g)};
    }
    return {alpha, chi, wrap_angle(phi), beta, std::log(g)};
}

// Angle in (-pi/2, pi/2].
inline double wrap_half_turn(double phi) {
    double w = std::remainder(phi, std::numbers::pi);
    if (w <= -std::numbers::pi / 2.0) {
        w += std::numbers::pi;
    }
    return w;
}

// (omega, phi1, phi2) of the quartic objective as circuit gates.
//
// The circuit has exact symmetries: a half turn anywhere after the Kerr gate
// only flips the sign of O_4, and R(phi2) S(w) R(phi1) equals
// R(phi2 - pi/2) S(-w) R(phi1 + pi/2).  The representative returned has
// w >= 0 and both angles in (-pi/2, pi/2], like the input squeezing r >= 0.
inline PrepParamsQuartic quartic_circuit(double r, double chi, double omega, double phi1, double phi2) {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    const double w = std::log(std::abs(omega));
    if (w < 0.0) {
        return {r, chi, wrap_half_turn(kHalfPi - phi1 + kHalfPi), -w, wrap_half_turn(kHalfPi - phi2 - kHalfPi)};
    }
    return {r, chi, wrap_half_turn(kHalfPi - phi1), w, wrap_half_turn(kHalfPi - phi2)};
}

} // namespace kerrsqueeze
