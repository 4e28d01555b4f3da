// fock.hpp
// Truncated Fock-space states, quadrature operators and the Gaussian and
// Kerr gates of a single bosonic mode.
//
// Conventions (used everywhere in the library):
//   x = (a + a^dag)/sqrt(2),  p = (a - a^dag)/(i sqrt(2)),  [x, p] = i
//   vacuum variances are 1/2 and n = (x^2 + p^2 - 1)/2
//   D(alpha)     = exp(-i alpha p)           x -> x + alpha
//   Dp(beta)     = exp(+i beta x)            p -> p + beta
//   S(r)         = exp(-i r (xp + px)/2)     x -> e^r x,  p -> e^-r p
//   R(phi)       = exp(-i phi (n + 1/2))     x -> cos(phi) x + sin(phi) p
//                                            p -> -sin(phi) x + cos(phi) p
//   K(chi)       = exp(-i chi (n+1)^2)  or  exp(-i chi (2n+1)^2)
// The arrows give the Heisenberg action U^dag (.) U.  With this sign choice a
// state rotated by R(pi/2) has its x-mean moved onto -p:  for D(1)|0> the
// rotated state has <x> = 0 and <p> = -1.

#pragma once

#include "kerrsqueeze/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kerrsqueeze {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultDim = 300;
inline constexpr double kTailFraction = 0.1;
inline constexpr double kTailMassLimit = 1e-8;

// First index of the tail region, the top `fraction` of the basis:
// n >= (1 - fraction) * dim.
inline std::size_t tail_start(std::size_t dim, double fraction = kTailFraction) {
    auto start = static_cast<std::size_t>(std::ceil((1.0 - fraction) * static_cast<double>(dim) - 1e-9));
    return std::min(start, dim);
}

inline void require_dim(std::size_t dim) {
    if (dim < 2) {
        throw InvalidDimension("truncation dimension must be at least 2, got " + std::to_string(dim));
    }
}

// ---------------------------------------------------------------------------
// FockState
// ---------------------------------------------------------------------------

class FockState {
public:
    static FockState vacuum(std::size_t dim) { return number(dim, 0); }

    static FockState number(std::size_t dim, std::size_t n) {
        require_dim(dim);
        if (n >= dim) {
            throw InvalidDimension("Fock index " + std::to_string(n) + " outside dimension " + std::to_string(dim));
        }
        CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
        v[static_cast<Eigen::Index>(n)] = 1.0;
        return FockState(std::move(v));
    }

    // Normalizes the given amplitudes.
    static FockState from_amplitudes(CVector amps) {
        require_dim(static_cast<std::size_t>(amps.size()));
        const double nrm = amps.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            throw Error("cannot normalize a zero or non-finite amplitude vector");
        }
        amps /= nrm;
        return FockState(std::move(amps));
    }

    // Takes amplitudes produced by a unitary map of a normalized state.
    static FockState adopt(CVector amps) { return FockState(std::move(amps)); }

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const CVector& amplitudes() const { return amps_; }
    Complex operator[](std::size_t n) const { return amps_[static_cast<Eigen::Index>(n)]; }
    double norm() const { return amps_.norm(); }

    double tail_mass(double fraction = kTailFraction) const {
        double mass = 0.0;
        for (auto n = static_cast<Eigen::Index>(tail_start(dim(), fraction)); n < amps_.size(); ++n) {
            mass += std::norm(amps_[n]);
        }
        return mass;
    }

    bool faithful(double limit = kTailMassLimit) const { return tail_mass() < limit; }

    void require_faithful(std::string_view what) const {
        const double mass = tail_mass();
        if (!(mass < kTailMassLimit)) {
            throw TruncationOverflow(std::string(what) + ": tail mass " + std::to_string(mass) +
                                     " exceeds limit at dim " + std::to_string(dim()));
        }
    }

private:
    explicit FockState(CVector amps) : amps_(std::move(amps)) {}
    CVector amps_;
};

// ---------------------------------------------------------------------------
// Spectral cache for the Hermitian generators of the Gaussian gates
// ---------------------------------------------------------------------------

enum class Generator { position, momentum, squeeze };

struct Spectrum {
    RVector values;
    CMatrix vectors;
};

namespace detail {

inline CMatrix ladder_matrix(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    CMatrix a = CMatrix::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

inline CMatrix position_matrix(std::size_t dim) {
    const CMatrix a = ladder_matrix(dim);
    return (a + a.adjoint()) / std::numbers::sqrt2;
}

inline CMatrix momentum_matrix(std::size_t dim) {
    const CMatrix a = ladder_matrix(dim);
    return (a - a.adjoint()) / Complex(0.0, std::numbers::sqrt2);
}

inline CMatrix generator_matrix(Generator g, std::size_t dim) {
    switch (g) {
    case Generator::position:
        return position_matrix(dim);
    case Generator::momentum:
        return momentum_matrix(dim);
    case Generator::squeeze: {
        const CMatrix x = position_matrix(dim);
        const CMatrix p = momentum_matrix(dim);
        CMatrix gsq = (x * p + p * x) / 2.0;
        // symmetrize away rounding so the eigensolver sees an exactly Hermitian input
        return (gsq + gsq.adjoint()) / 2.0;
    }
    }
    return {};
}

class SpectrumCache {
public:
    std::shared_ptr<const Spectrum> get(Generator g, std::size_t dim) {
        const auto key = std::make_pair(static_cast<int>(g), dim);
        {
            std::shared_lock lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) {
                return it->second;
            }
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(generator_matrix(g, dim));
        auto spec = std::make_shared<Spectrum>(Spectrum{solver.eigenvalues(), solver.eigenvectors()});
        std::unique_lock lock(mutex_);
        // a concurrent builder may have won; either result is identical
        auto [it, inserted] = cache_.emplace(key, std::move(spec));
        return it->second;
    }

private:
    std::shared_mutex mutex_;
    std::map<std::pair<int, std::size_t>, std::shared_ptr<const Spectrum>> cache_;
};

inline SpectrumCache& spectrum_cache() {
    static SpectrumCache cache;
    return cache;
}

} // namespace detail

inline std::shared_ptr<const Spectrum> generator_spectrum(Generator g, std::size_t dim) {
    require_dim(dim);
    return detail::spectrum_cache().get(g, dim);
}

// ---------------------------------------------------------------------------
// OperatorMatrix
// ---------------------------------------------------------------------------

enum class OperatorKind { hermitian, unitary, general };

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

// A dense complex operator on the truncated space.  Diagonal gates keep only
// their diagonal, and gates generated by a cached Hermitian generator keep the
// generator's eigenbasis plus per-eigenvalue phases, so applying them to a
// state never needs the full matrix.  entries() materializes the dense form.
class OperatorMatrix {
public:
    static OperatorMatrix dense(CMatrix m, OperatorKind kind) {
        if (m.rows() != m.cols()) {
            throw DimensionMismatch("operator matrix must be square");
        }
        require_dim(static_cast<std::size_t>(m.rows()));
        if (kind == OperatorKind::hermitian) {
            if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
                throw Error("matrix declared hermitian is not self-adjoint");
            }
        } else if (kind == OperatorKind::unitary) {
            const CMatrix check = m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols());
            if (check.cwiseAbs().maxCoeff() > kUnitaryTolerance) {
                throw Error("matrix declared unitary fails U^dag U = I");
            }
        }
        return OperatorMatrix(Dense{std::move(m)}, kind);
    }

    static OperatorMatrix diagonal(CVector d, OperatorKind kind) {
        require_dim(static_cast<std::size_t>(d.size()));
        return OperatorMatrix(Diagonal{std::move(d)}, kind);
    }

    // U = V diag(phases) V^dag with V the eigenvectors of a Hermitian generator.
    static OperatorMatrix spectral(std::shared_ptr<const Spectrum> spectrum, CVector phases) {
        if (!spectrum || spectrum->values.size() != phases.size()) {
            throw DimensionMismatch("spectral phases do not match the generator");
        }
        return OperatorMatrix(Spectral{std::move(spectrum), std::move(phases)}, OperatorKind::unitary);
    }

    static OperatorMatrix identity(std::size_t dim) {
        return diagonal(CVector::Ones(static_cast<Eigen::Index>(dim)), OperatorKind::unitary);
    }

    std::size_t dim() const {
        return std::visit([](const auto& r) { return r.dim(); }, rep_);
    }
    OperatorKind kind() const { return kind_; }
    bool is_diagonal() const { return std::holds_alternative<Diagonal>(rep_); }

    // Diagonal entries; only valid for diagonal operators.
    const CVector& diagonal_entries() const { return std::get<Diagonal>(rep_).d; }

    CMatrix entries() const {
        return std::visit([](const auto& r) { return r.materialize(); }, rep_);
    }

    CVector apply_to(const CVector& v) const {
        if (static_cast<std::size_t>(v.size()) != dim()) {
            throw DimensionMismatch("operator dimension " + std::to_string(dim()) + " vs vector " +
                                    std::to_string(v.size()));
        }
        return std::visit([&](const auto& r) { return r.apply(v); }, rep_);
    }

    OperatorMatrix adjoint() const {
        if (const auto* dg = std::get_if<Diagonal>(&rep_)) {
            return OperatorMatrix(Diagonal{dg->d.conjugate()}, kind_);
        }
        if (const auto* sp = std::get_if<Spectral>(&rep_)) {
            return OperatorMatrix(Spectral{sp->spectrum, sp->phases.conjugate()}, kind_);
        }
        return OperatorMatrix(Dense{std::get<Dense>(rep_).m.adjoint()}, kind_);
    }

    // Composition: (A * B) v = A (B v).
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
        if (a.dim() != b.dim()) {
            throw DimensionMismatch("cannot compose operators of different dimension");
        }
        const OperatorKind kind = (a.kind_ == OperatorKind::unitary && b.kind_ == OperatorKind::unitary)
                                      ? OperatorKind::unitary
                                      : OperatorKind::general;
        if (a.is_diagonal() && b.is_diagonal()) {
            return OperatorMatrix(Diagonal{a.diagonal_entries().cwiseProduct(b.diagonal_entries())}, kind);
        }
        return OperatorMatrix(Dense{a.entries() * b.entries()}, kind);
    }

private:
    struct Dense {
        CMatrix m;
        std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }
        CMatrix materialize() const { return m; }
        CVector apply(const CVector& v) const { return m * v; }
    };
    struct Diagonal {
        CVector d;
        std::size_t dim() const { return static_cast<std::size_t>(d.size()); }
        CMatrix materialize() const { return d.asDiagonal(); }
        CVector apply(const CVector& v) const { return d.cwiseProduct(v); }
    };
    struct Spectral {
        std::shared_ptr<const Spectrum> spectrum;
        CVector phases;
        std::size_t dim() const { return static_cast<std::size_t>(phases.size()); }
        CMatrix materialize() const {
            return spectrum->vectors * phases.asDiagonal() * spectrum->vectors.adjoint();
        }
        CVector apply(const CVector& v) const {
            CVector coeffs = spectrum->vectors.adjoint() * v;
            coeffs.array() *= phases.array();
            return spectrum->vectors * coeffs;
        }
    };
    using Rep = std::variant<Dense, Diagonal, Spectral>;

    OperatorMatrix(Rep rep, OperatorKind kind) : rep_(std::move(rep)), kind_(kind) {}

    Rep rep_;
    OperatorKind kind_;
};

// ---------------------------------------------------------------------------
// Ladder and quadrature operators
// ---------------------------------------------------------------------------

inline OperatorMatrix build_ladder(std::size_t dim) {
    require_dim(dim);
    return OperatorMatrix::dense(detail::ladder_matrix(dim), OperatorKind::general);
}

inline std::pair<OperatorMatrix, OperatorMatrix> build_quadratures(std::size_t dim) {
    require_dim(dim);
    return {OperatorMatrix::dense(detail::position_matrix(dim), OperatorKind::hermitian),
            OperatorMatrix::dense(detail::momentum_matrix(dim), OperatorKind::hermitian)};
}

inline OperatorMatrix number_operator(std::size_t dim) {
    require_dim(dim);
    CVector d(static_cast<Eigen::Index>(dim));
    for (Eigen::Index n = 0; n < d.size(); ++n) {
        d[n] = static_cast<double>(n);
    }
    return OperatorMatrix::diagonal(std::move(d), OperatorKind::hermitian);
}

// Real linear combination cx*x + cp*p + c0 of the quadratures.  Applying it
// to a vector costs O(dim) because x and p are tridiagonal.
struct QuadratureForm {
    double cx = 0.0;
    double cp = 0.0;
    double c0 = 0.0;

    void apply(const CVector& in, CVector& out) const {
        const Eigen::Index d = in.size();
        out.resize(d);
        const double sx = cx / std::numbers::sqrt2;
        const double sp = cp / std::numbers::sqrt2;
        // x v:  (sqrt(n) v[n-1] + sqrt(n+1) v[n+1]) / sqrt2
        // p v: -i (sqrt(n+1) v[n+1] - sqrt(n) v[n-1]) / sqrt2
        const Complex up(sx, sp);    // weight of sqrt(n) v[n-1]
        const Complex down(sx, -sp); // weight of sqrt(n+1) v[n+1]
        for (Eigen::Index n = 0; n < d; ++n) {
            Complex acc = c0 * in[n];
            if (n > 0) {
                acc += up * (std::sqrt(static_cast<double>(n)) * in[n - 1]);
            }
            if (n + 1 < d) {
                acc += down * (std::sqrt(static_cast<double>(n + 1)) * in[n + 1]);
            }
            out[n] = acc;
        }
    }

    CVector operator()(const CVector& in) const {
        CVector out;
        apply(in, out);
        return out;
    }

    CMatrix matrix(std::size_t dim) const {
        const auto d = static_cast<Eigen::Index>(dim);
        return cx * detail::position_matrix(dim) + cp * detail::momentum_matrix(dim) +
               c0 * CMatrix::Identity(d, d);
    }
};

inline constexpr QuadratureForm kPosition{1.0, 0.0, 0.0};
inline constexpr QuadratureForm kMomentum{0.0, 1.0, 0.0};

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

enum class KerrConvention {
    n_plus_one_squared,     // exp(-i chi (n+1)^2), default
    two_n_plus_one_squared, // exp(-i chi (2n+1)^2) = exp(-i chi (x^2+p^2)^2)
};

inline std::string_view to_string(KerrConvention c) {
    return c == KerrConvention::n_plus_one_squared ? "nPlus1Sq" : "twoNplus1Sq";
}

inline KerrConvention parse_convention(std::string_view s) {
    if (s == "nPlus1Sq") {
        return KerrConvention::n_plus_one_squared;
    }
    if (s == "twoNplus1Sq") {
        return KerrConvention::two_n_plus_one_squared;
    }
    throw ConfigError("unknown Kerr convention '" + std::string(s) + "' (expected nPlus1Sq or twoNplus1Sq)");
}

// Multiplier turning chi into the strength of the n^2 term of the generator.
inline double kerr_strength_factor(KerrConvention c) {
    return c == KerrConvention::n_plus_one_squared ? 1.0 : 4.0;
}

inline double kerr_eigenvalue(std::size_t n, KerrConvention c) {
    const double m = (c == KerrConvention::n_plus_one_squared) ? static_cast<double>(n) + 1.0
                                                               : 2.0 * static_cast<double>(n) + 1.0;
    return m * m;
}

namespace detail {

inline OperatorMatrix generated_gate(Generator g, double t, std::size_t dim) {
    auto spec = generator_spectrum(g, dim);
    CVector phases(spec->values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        phases[k] = std::polar(1.0, -t * spec->values[k]);
    }
    return OperatorMatrix::spectral(std::move(spec), std::move(phases));
}

} // namespace detail

inline OperatorMatrix gate_displacement(double alpha, std::size_t dim) {
    return detail::generated_gate(Generator::momentum, alpha, dim);
}

inline OperatorMatrix gate_momentum_displacement(double beta, std::size_t dim) {
    return detail::generated_gate(Generator::position, -beta, dim);
}

// Unchecked squeeze; used when the caller polices the tail mass of the result.
inline OperatorMatrix squeeze_operator(double r, std::size_t dim) {
    return detail::generated_gate(Generator::squeeze, r, dim);
}

inline OperatorMatrix gate_squeeze(double r, std::size_t dim) {
    OperatorMatrix s = squeeze_operator(r, dim);
    FockState::adopt(s.apply_to(FockState::vacuum(dim).amplitudes()))
        .require_faithful("squeeze r=" + std::to_string(r));
    return s;
}

inline OperatorMatrix gate_rotation(double phi, std::size_t dim) {
    require_dim(dim);
    CVector d(static_cast<Eigen::Index>(dim));
    for (Eigen::Index n = 0; n < d.size(); ++n) {
        d[n] = std::polar(1.0, -phi * (static_cast<double>(n) + 0.5));
    }
    return OperatorMatrix::diagonal(std::move(d), OperatorKind::unitary);
}

inline OperatorMatrix gate_kerr(double chi, std::size_t dim,
                                KerrConvention convention = KerrConvention::n_plus_one_squared) {
    require_dim(dim);
    CVector d(static_cast<Eigen::Index>(dim));
    for (Eigen::Index n = 0; n < d.size(); ++n) {
        d[n] = std::polar(1.0, -chi * kerr_eigenvalue(static_cast<std::size_t>(n), convention));
    }
    return OperatorMatrix::diagonal(std::move(d), OperatorKind::unitary);
}

// In-place Kerr for hot loops.
inline void apply_kerr_inplace(CVector& v, double chi, KerrConvention convention) {
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        v[n] *= std::polar(1.0, -chi * kerr_eigenvalue(static_cast<std::size_t>(n), convention));
    }
}

inline FockState apply(const OperatorMatrix& gate, const FockState& state) {
    if (gate.dim() != state.dim()) {
        throw DimensionMismatch("gate dimension " + std::to_string(gate.dim()) + " vs state " +
                                std::to_string(state.dim()));
    }
    if (gate.kind() != OperatorKind::unitary) {
        throw Error("apply() requires a unitary gate");
    }
    return FockState::adopt(gate.apply_to(state.amplitudes()));
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

inline Complex expectation(const FockState& state, const OperatorMatrix& op) {
    if (op.dim() != state.dim()) {
        throw DimensionMismatch("operator dimension " + std::to_string(op.dim()) + " vs state " +
                                std::to_string(state.dim()));
    }
    return state.amplitudes().dot(op.apply_to(state.amplitudes()));
}

struct VarianceMatrix {
    double vxx = 0.0;
    double vpp = 0.0;
    double vxp = 0.0;

    double determinant() const { return vxx * vpp - vxp * vxp; }

    double min_eigenvalue() const {
        const double mean = 0.5 * (vxx + vpp);
        const double half_gap = std::hypot(0.5 * (vxx - vpp), vxp);
        return mean - half_gap;
    }
};

inline VarianceMatrix variance_matrix(const FockState& state) {
    const CVector& psi = state.amplitudes();
    const CVector xs = kPosition(psi);
    const CVector ps = kMomentum(psi);
    const double mx = psi.dot(xs).real();
    const double mp = psi.dot(ps).real();
    return VarianceMatrix{
        xs.squaredNorm() - mx * mx,
        ps.squaredNorm() - mp * mp,
        xs.dot(ps).real() - mx * mp,
    };
}

inline RVector fock_probabilities(const FockState& state) {
    return state.amplitudes().cwiseAbs2();
}

// ---------------------------------------------------------------------------
// Wigner function
// ---------------------------------------------------------------------------

struct GridSpec {
    double x_min = -5.0;
    double x_max = 5.0;
    double p_min = -5.0;
    double p_max = 5.0;
    std::size_t nx = 101;
    std::size_t np = 101;
};

struct WignerGrid {
    std::vector<double> x;
    std::vector<double> p;
    Eigen::MatrixXd values; // values(i, j) = W(x[i], p[j])

    // Trapezoidal integral over the window.
    double integral() const {
        double total = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double wx = (i == 0 || i + 1 == x.size()) ? 0.5 : 1.0;
                const double wp = (j == 0 || j + 1 == p.size()) ? 0.5 : 1.0;
                total += wx * wp * values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        const double dx = x.size() > 1 ? (x.back() - x.front()) / static_cast<double>(x.size() - 1) : 0.0;
        const double dp = p.size() > 1 ? (p.back() - p.front()) / static_cast<double>(p.size() - 1) : 0.0;
        return total * dx * dp;
    }
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return out;
}

// Wigner function normalized so that the vacuum is exp(-x^2 - p^2)/pi.
// Uses the Laguerre-free recurrence over |m><n| Wigner kernels; O(dim^2) per
// grid point.
inline WignerGrid wigner_grid(const FockState& state, const GridSpec& grid) {
    if (!std::isfinite(grid.x_min) || !std::isfinite(grid.x_max) || !std::isfinite(grid.p_min) ||
        !std::isfinite(grid.p_max) || grid.nx == 0 || grid.np == 0) {
        throw Error("Wigner grid bounds must be finite and non-empty");
    }
    WignerGrid out{linspace(grid.x_min, grid.x_max, grid.nx), linspace(grid.p_min, grid.p_max, grid.np),
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.nx), static_cast<Eigen::Index>(grid.np))};
    const CVector& psi = state.amplitudes();
    const auto dim = psi.size();

    // Drop negligible top-of-basis amplitudes; they only cost time.
    Eigen::Index used = dim;
    while (used > 1 && std::abs(psi[used - 1]) < 1e-15) {
        --used;
    }

    std::vector<Complex> kernel(static_cast<std::size_t>(used));
    for (std::size_t i = 0; i < grid.nx; ++i) {
        for (std::size_t j = 0; j < grid.np; ++j) {
            const Complex a = Complex(out.x[i], out.p[j]) / std::numbers::sqrt2;
            kernel[0] = std::exp(-2.0 * std::norm(a)) / std::numbers::pi;
            // rho(m, n) = psi[m] conj(psi[n])
            double w = std::norm(psi[0]) * kernel[0].real();
            for (Eigen::Index n = 1; n < used; ++n) {
                kernel[static_cast<std::size_t>(n)] =
                    2.0 * a * kernel[static_cast<std::size_t>(n - 1)] / std::sqrt(static_cast<double>(n));
                w += 2.0 * (psi[0] * std::conj(psi[n]) * kernel[static_cast<std::size_t>(n)]).real();
            }
            for (Eigen::Index m = 1; m < used; ++m) {
                const double sm = std::sqrt(static_cast<double>(m));
                auto mi = static_cast<std::size_t>(m);
                Complex temp = kernel[mi];
                kernel[mi] = (2.0 * std::conj(a) * temp - sm * kernel[mi - 1]) / sm;
                w += std::norm(psi[m]) * kernel[mi].real();
                for (Eigen::Index n = m + 1; n < used; ++n) {
                    auto ni = static_cast<std::size_t>(n);
                    const Complex next = (2.0 * a * kernel[ni - 1] - sm * temp) / std::sqrt(static_cast<double>(n));
                    temp = kernel[ni];
                    kernel[ni] = next;
                    w += 2.0 * (psi[m] * std::conj(psi[n]) * kernel[ni]).real();
                }
            }
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
        }
    }
    return out;
}

} // namespace kerrsqueeze
