// rng.hpp
// Reproducible random streams keyed by (seed, stream, index).  Every stream
// is independent of execution order, so parallel and serial runs agree.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace kerrsqueeze {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : engine_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ (index * 0xd1342543de82ef95ULL))) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal by Box-Muller; always consumes exactly two uniforms.
    // std::normal_distribution is implementation-defined, which would break
    // bit-identical replay across standard libraries.
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace kerrsqueeze
