#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace bosestats {

namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace rng_detail

/// Counter-derived random stream: the state is a pure function of the tag
/// list (master seed, depth index, run index, channel, ...), so every trial
/// owns an independent stream and results never depend on scheduling or
/// worker count. The generator is xoshiro256++ seeded through splitmix64;
/// all samplers are hand-rolled so sequences are identical across platforms
/// and standard libraries.
class RngStream {
public:
    explicit RngStream(std::initializer_list<std::uint64_t> tags) {
        std::uint64_t h = 0x243F6A8885A308D3ULL; // pi fractional bits
        for (std::uint64_t t : tags) {
            h ^= t + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
            std::uint64_t s = h;
            h = rng_detail::splitmix64(s);
        }
        std::uint64_t seeder = h;
        for (auto& word : state_) word = rng_detail::splitmix64(seeder);
    }

    std::uint64_t next_u64() {
        using rng_detail::rotl;
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

    /// Uniform double in (0, 1).
    double uniform01() {
        double u;
        do {
            u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        } while (u <= 0.0);
        return u;
    }

    /// Uniform double in [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Standard normal conditioned on |z| <= max_abs_sigma.
    double truncated_normal(double max_abs_sigma) {
        double z;
        do {
            z = normal();
        } while (std::fabs(z) > max_abs_sigma);
        return z;
    }

    /// Poisson sample. Knuth's product method for small means, Hormann's
    /// PTRS transformed rejection above it; both sample the exact
    /// distribution (no Gaussian approximation).
    std::uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 10.0) return poisson_knuth(lambda);
        return poisson_ptrs(lambda);
    }

private:
    std::uint64_t poisson_knuth(double lambda) {
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t poisson_ptrs(double lambda) {
        const double slam = std::sqrt(lambda);
        const double loglam = std::log(lambda);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform01() - 0.5;
            const double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                kf * loglam - lambda - std::lgamma(kf + 1.0)) {
                return static_cast<std::uint64_t>(kf);
            }
        }
    }

    std::uint64_t state_[4] = {0, 0, 0, 0};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace bosestats
