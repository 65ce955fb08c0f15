#pragma once

// Seeded random streams whose output does not depend on the standard
// library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace sind {

class Rng {
public:
    /// Stream keyed by an ordered list of integers, e.g. {seed, trial, attempt}.
    Rng(std::initializer_list<std::uint64_t> key) : engine_(mix(key)) {}
    explicit Rng(std::uint64_t seed) : Rng({seed}) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    // splitmix64 folding of the key into one 64-bit seed
    static std::uint64_t mix(std::initializer_list<std::uint64_t> key) {
        std::uint64_t state = 0x243f6a8885a308d3ULL;
        for (std::uint64_t k : key) {
            state ^= k + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
            std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            state = z ^ (z >> 31);
        }
        return state;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sind
