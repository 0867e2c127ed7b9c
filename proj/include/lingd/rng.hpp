#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace lingd {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace detail

// xoshiro256** seeded through splitmix64. Deterministic across platforms,
// unlike the standard-library distributions.
//
// Stream splitting: every sampled object (a graph, a dataset, a restart)
// draws from its own child stream obtained via child(tag). Regenerating one
// object therefore never disturbs the others.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = detail::splitmix64(x++);
    }

    // Independent stream derived from this generator's seed and a tag.
    Rng child(std::uint64_t tag) const {
        return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(tag + 1)));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform on {0, 1, ..., n-1}; n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection-free modulo is biased for huge n; fine for index draws.
        return next() % n;
    }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform over +/-[lo, hi]: random sign, magnitude uniform on [lo, hi].
    double signed_uniform(double lo, double hi) {
        const double mag = uniform(lo, hi);
        return (next() & 1u) ? mag : -mag;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
};

}  // namespace lingd
