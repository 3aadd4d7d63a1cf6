#pragma once

#include <cstdint>
#include <random>

#include "magic/geometry.hpp"

namespace magic {

/// splitmix64 step; used to mix seeds into independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t state, std::uint64_t stream) {
    std::uint64_t z = state + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Seeded generator with explicit draw arithmetic so identical seeds give
/// identical streams on every build.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }
    RngStream derive(std::uint64_t stream) const { return RngStream(mix_seed(seed_, stream)); }

    std::uint64_t next_u64() { return eng_(); }

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) {  // [0, n)
        return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
    }

    double normal() {
        // Box-Muller without caching; one draw may discard its pair but the
        // stream stays reproducible.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    Vec3 normal3(double sigma) { return {sigma * normal(), sigma * normal(), sigma * normal()}; }

    Vec3 unit_vector() {
        while (true) {
            const Vec3 v{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            const double n2 = norm2(v);
            if (n2 > 1e-12 && n2 <= 1.0) return v / std::sqrt(n2);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace magic
