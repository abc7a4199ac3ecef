// rng.hpp — counter-based splittable random streams. Substreams are keyed by
// (master_seed, repetition, hypothesis); distinct keys give statistically
// independent streams regardless of consumption order or thread schedule.
#pragma once

#include <cmath>
#include <cstdint>

namespace mcmt {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

struct StreamSeed {
    std::uint64_t master_seed = 0;
    std::uint64_t repetition = 0;
    std::uint64_t hypothesis = 0;
};

// SplitMix64 sequence whose base state is a hash of the stream key. The
// output at position i is mix(base + i * golden): a pure counter generator.
class RngStream {
public:
    explicit RngStream(const StreamSeed& seed) {
        std::uint64_t h = detail::mix64(seed.master_seed + detail::kGolden);
        h = detail::mix64(h ^ (seed.repetition + detail::kGolden));
        h = detail::mix64(h ^ (seed.hypothesis + detail::kGolden));
        state_ = h;
    }

    std::uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    // Uniform on [0,1) with 53 random bits.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double next_normal() {
        // Box-Muller; shift u1 into (0,1] so the log is finite.
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Marsaglia-Tsang, with the standard boost for shape < 1.
    double next_gamma(double shape) {
        if (shape < 1.0) {
            const double g = next_gamma(shape + 1.0);
            const double u = 1.0 - next_double();
            return g * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double next_beta(double a, double b) {
        const double ga = next_gamma(a);
        const double gb = next_gamma(b);
        return ga / (ga + gb);
    }

private:
    std::uint64_t state_;
};

} // namespace mcmt
