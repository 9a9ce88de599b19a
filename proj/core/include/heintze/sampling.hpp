#pragma once

#include "heintze/linalg.hpp"

#include <cstdint>
#include <random>

namespace heintze {

/// Seeded source of uniform variates. Uses mt19937_64 and explicit 53-bit
/// conversion so the stream is identical across standard libraries.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    Vec cube(int n, double radius) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = uniform(-radius, radius);
        return v;
    }

    /// Uniform direction on the unit sphere (rejection from the cube).
    Vec direction(int n) {
        for (;;) {
            Vec v = cube(n, 1.0);
            const double r = v.norm();
            if (r > 1e-3 && r <= 1.0) return v / r;
        }
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace heintze
