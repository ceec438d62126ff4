#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace symdistill {

// Thin wrapper over mt19937_64. The distributions are written out by hand so
// that streams are identical across standard library implementations.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n)
    {
        // Lemire's multiply-shift; the bias is below 2^-64 * n and irrelevant here.
        __extension__ using u128 = unsigned __int128;
        const u128 product = static_cast<u128>(engine_()) * static_cast<u128>(n);
        return static_cast<std::size_t>(product >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call.
    double normal()
    {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    engine_type engine_;
};

// Seed for stream `k` derived from a base seed (splitmix64 finalizer), so
// nearby base seeds do not share streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace symdistill
