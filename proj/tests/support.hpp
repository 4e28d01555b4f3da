// Shared helpers for the test suites: dense reference operators built
// independently of the O(dim) library paths, and seeded random inputs.

#pragma once

#include "kerrsqueeze/fock.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace testing_support {

using kerrsqueeze::CMatrix;
using kerrsqueeze::Complex;
using kerrsqueeze::CVector;

// Annihilation operator written out entry by entry.
inline CMatrix dense_a(int dim) {
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(double(n));
    }
    return a;
}

inline CMatrix dense_x(int dim) {
    const CMatrix a = dense_a(dim);
    return (a + a.adjoint()) / std::sqrt(2.0);
}

inline CMatrix dense_p(int dim) {
    const CMatrix a = dense_a(dim);
    return (a - a.adjoint()) * Complex(0.0, -1.0 / std::sqrt(2.0));
}

// <psi|M|psi> - <psi|M|psi>^2 for a Hermitian dense M.
inline double dense_variance(const CVector& psi, const CMatrix& m) {
    const CVector mpsi = m * psi;
    const double mean = psi.dot(mpsi).real();
    return mpsi.squaredNorm() - mean * mean;
}

// Random normalized state supported on the lowest `support` levels.
inline CVector random_state(int dim, int support, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    CVector v = CVector::Zero(dim);
    for (int k = 0; k < support; ++k) {
        v[k] = Complex(n01(rng), n01(rng)) / (1.0 + 0.3 * k);
    }
    return v / v.norm();
}

// Largest |a_k - e^{i theta} b_k| after removing the global phase.
inline double phase_insensitive_distance(const CVector& a, const CVector& b) {
    const Complex overlap = b.dot(a);
    const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
    return (a - phase * b).cwiseAbs().maxCoeff();
}

} // namespace testing_support
