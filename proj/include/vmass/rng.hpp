#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vmass {

// Deterministic random source. All draws go through explicit bit
// conversions instead of std:: distributions, whose output is
// implementation-defined; identical seeds give identical streams on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller; one value per call, the partner draw is discarded.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace vmass
