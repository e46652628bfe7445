#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Self-contained deterministic RNG stack. Seeded runs must produce identical
// bytes on every platform, so no std::<distribution> (implementation-defined)
// is used anywhere that reaches an output file.

namespace memvote {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256** seeded via splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Independent stream: one master seed, one stream id. Used to give every
    // read / species / array its own generator so work order never matters.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed;
        std::uint64_t a = splitmix64(sm);
        sm = a ^ (stream * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
        return Rng(splitmix64(sm));
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0,1]; safe as a log() argument.
    double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }

    // Uniform integer in [0, n). n == 0 is a caller bug; returns 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        // Rejection sampling, no modulo bias.
        std::uint64_t threshold = (0 - n) % n;
        while (true) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; spare value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stdv) { return mean + stdv * normal(); }

    double lognormal(double mu_log, double sigma_log) { return std::exp(mu_log + sigma_log * normal()); }

    // Geometric on {1,2,...} with success probability p, via inversion.
    std::uint64_t geometric1(double p) {
        if (p >= 1.0) return 1;
        if (p <= 0.0) return 1;  // degenerate; caller validates
        double g = std::floor(std::log(uniform_pos()) / std::log1p(-p));
        if (g < 0) g = 0;
        return 1 + static_cast<std::uint64_t>(g);
    }

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace memvote
