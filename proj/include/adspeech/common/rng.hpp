#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace adspeech {

// SplitMix64. Small, fast, and identical output on every platform, which is
// what the reproducibility contract needs; std::shuffle and the distribution
// adaptors in <random> are not portable across standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection-free modulo bias is negligible for our n (dataset sizes),
        // but keep it exact anyway.
        std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Approximate standard normal via the polar method.
    double next_gaussian() {
        for (;;) {
            double u = next_double(-1.0, 1.0);
            double v = next_double(-1.0, 1.0);
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                double m = std::sqrt(-2.0 * std::log(s) / s);
                return u * m;
            }
        }
    }

private:
    std::uint64_t state_;
};

inline const char* kRngName = "splitmix64";

// Stable mix of two seeds (seed, stream index) for per-fold / per-worker RNGs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0xA0761D6478BD642FULL + stream * 0xE7037ED1A0B428DBULL));
    return g.next_u64();
}

// Fisher-Yates with SplitMix64; deterministic for a given seed.
template <typename T>
void shuffle_inplace(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace adspeech
