#pragma once

#include <cstdint>
#include <cmath>

namespace abmphase {

// Deterministic, stream-splittable random source. Streams are keyed by a
// 64-bit seed plus up to two stream indices, so any (sigma, trajectory)
// pair can be simulated independently of scheduling order and still
// reproduce bit-identical draws.
//
// The core generator is xoshiro256++ seeded through splitmix64; normal
// variates use the polar Box-Muller method so no library-defined
// distribution (which varies across standard libraries) enters the output.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_a = 0,
                       std::uint64_t stream_b = 0) {
        std::uint64_t x = seed;
        x = mix(x ^ (0x9e3779b97f4a7c15ULL * (stream_a + 1)));
        x = mix(x ^ (0xbf58476d1ce4e5b9ULL * (stream_b + 1)));
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            s = mix(x);
        }
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1): 53-bit mantissa, never exactly 0.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection to remove modulo bias.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via polar Box-Muller with a cached spare.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    bool have_spare_;
    double spare_;
};

// Fisher-Yates shuffle of an index range, driven by an RngStream.
template <typename Container>
void shuffle(Container& c, RngStream& rng) {
    if (c.size() < 2) return;
    for (std::size_t i = c.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i + 1));
        std::swap(c[i], c[j]);
    }
}

}  // namespace abmphase
