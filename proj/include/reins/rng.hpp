#pragma once

// Seedable, platform-stable normal variates.
//
// Uniforms come from std::mt19937_64 (whose output sequence is fixed by the
// C++ standard) mapped to the open interval (0, 1) as ((x >> 11) + 0.5) / 2^53.
// Normals are obtained by inversion with Wichura's AS 241 (PPND16), accurate
// to about 1e-16. Sub-streams are seeded with splitmix64(seed ^ splitmix64(index)).

#include <cstdint>
#include <random>

namespace reins {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of sub-stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Inverse of the standard normal CDF for p in (0, 1).
double inverse_normal_cdf(double p);

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    double normal() { return inverse_normal_cdf(uniform()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace reins
