#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace alcurate {

// Seeded random source with explicitly pinned distributions. The standard
// library leaves the draw sequence of normal/uniform/shuffle unspecified, so
// anything frozen into tests or reports would silently change across
// toolchains; every transformation lives here instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). n must be > 0.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // Marsaglia polar method, one spare cached between calls.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return mean + stddev * u * m;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives independent sub-seeds from a base seed and a purpose tag, so that
// e.g. the split shuffle and the weight init never share a stream.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace alcurate
