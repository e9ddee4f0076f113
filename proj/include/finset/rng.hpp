#pragma once

#include <cmath>
#include <cstdint>

#include "finset/errors.hpp"
#include "finset/linalg.hpp"
#include "finset/matrix.hpp"

namespace finset {

/// Counter-style seeded generator with independent streams.
///
/// A (seed, stream) pair fully determines the sample sequence, so
/// concurrent tasks can each own stream i of a shared seed and the
/// combined run stays reproducible regardless of scheduling. The core is
/// the splitmix64 increment-and-finalize step; Gaussians come from a
/// Box-Muller transform evaluated with fixed operation order, so sequences
/// are identical across runs.
class RngState {
public:
    explicit RngState(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), state_(mix(mix(seed ^ kGolden) ^ stream)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform in [0, 1), 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal draw; consumes exactly two 64-bit words.
    double next_gaussian() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;        // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_;
};

/// mean + L * xi with xi of i.i.d. standard normals; advances rng.
inline Vector sample_gaussian(const Vector& mean, const CholeskyFactor& cov_factor,
                              RngState& rng) {
    const std::size_t n = cov_factor.dim();
    if (mean.size() != n) {
        throw DimensionMismatch("sample_gaussian: mean length " + std::to_string(mean.size()) +
                                " vs factor dimension " + std::to_string(n));
    }
    Vector xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = rng.next_gaussian();
    Vector out = mean;
    const Matrix& l = cov_factor.lower();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * xi[j];
        out[i] += s;
    }
    return out;
}

}  // namespace finset
