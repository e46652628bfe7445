#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "memvote/rng.hpp"

namespace memvote {

// Conductance population programmed into the hashing crossbar.
struct CrossbarDist {
    enum class Kind {
        Lognormal,      // hardware-like: reset-pulse conductances, clamped
        IdealGaussian,  // signed N(0,1) split into an even/odd rectified pair
    };
    Kind kind = Kind::Lognormal;
    double median_us = 4.0;  // lognormal median, uS
    double sigma_log = 0.9;  // lognormal shape
    double max_us = 60.0;    // clamp ceiling, uS

    static CrossbarDist lognormal() { return {}; }
    static CrossbarDist ideal_gaussian() { return {Kind::IdealGaussian, 0, 0, 0}; }
};

// m x 2B conductance matrix: column pair (2j, 2j+1) realizes one signed
// hyperplane coefficient per input row. Stored row-major.
struct CrossbarMatrix {
    std::uint32_t m = 0;
    std::uint32_t bits = 0;
    std::uint64_t rng_seed = 0;
    CrossbarDist dist;
    std::vector<float> conductance;  // m * 2*bits
    std::vector<float> g_eff;        // m * bits cached pair differences

    float cond(std::uint32_t i, std::uint32_t col) const {
        return conductance[std::size_t(i) * 2 * bits + col];
    }
    float eff(std::uint32_t i, std::uint32_t j) const { return g_eff[std::size_t(i) * bits + j]; }

    void rebuild_eff() {
        g_eff.assign(std::size_t(m) * bits, 0.0f);
        for (std::uint32_t i = 0; i < m; ++i)
            for (std::uint32_t j = 0; j < bits; ++j)
                g_eff[std::size_t(i) * bits + j] = cond(i, 2 * j) - cond(i, 2 * j + 1);
    }
};

// Deterministic in (m, bits, dist, seed). Device draw order is row-major so
// the same seed always programs the same array.
inline CrossbarMatrix generate_crossbar(std::uint32_t m, std::uint32_t bits, const CrossbarDist& dist,
                                        std::uint64_t seed) {
    if (m == 0 || bits == 0) throw std::invalid_argument("generate_crossbar: m and bits must be positive");
    CrossbarMatrix cb;
    cb.m = m;
    cb.bits = bits;
    cb.rng_seed = seed;
    cb.dist = dist;
    cb.conductance.resize(std::size_t(m) * 2 * bits);

    Rng rng = Rng::derive(seed, 0x4c5348u);  // crossbar stream
    if (dist.kind == CrossbarDist::Kind::Lognormal) {
        if (!(dist.median_us > 0) || !(dist.max_us > 0) || !(dist.sigma_log >= 0))
            throw std::invalid_argument("generate_crossbar: bad lognormal parameters");
        double mu_log = std::log(dist.median_us);
        for (auto& g : cb.conductance) {
            double v = rng.lognormal(mu_log, dist.sigma_log);
            if (v > dist.max_us) v = dist.max_us;
            g = static_cast<float>(v);
        }
    } else {
        // One signed coefficient per device pair; rectified split keeps both
        // conductances physical (non-negative).
        for (std::uint32_t i = 0; i < m; ++i) {
            for (std::uint32_t j = 0; j < bits; ++j) {
                double g = rng.normal();
                cb.conductance[std::size_t(i) * 2 * bits + 2 * j] = g > 0 ? static_cast<float>(g) : 0.0f;
                cb.conductance[std::size_t(i) * 2 * bits + 2 * j + 1] = g > 0 ? 0.0f : static_cast<float>(-g);
            }
        }
    }
    cb.rebuild_eff();
    return cb;
}

// Signed hyperplane matrix realized by the column pairs: G[i][j] = c[i][2j] - c[i][2j+1].
inline const std::vector<float>& effective_matrix(const CrossbarMatrix& cb) { return cb.g_eff; }

// Packed hash. Bit j of word j/64 at position j%64.
struct SeedHash {
    std::vector<std::uint64_t> words;
    std::uint32_t nbits = 0;

    static std::size_t word_count(std::uint32_t bits) { return (std::size_t(bits) + 63) / 64; }

    bool bit(std::uint32_t j) const { return (words[j >> 6] >> (j & 63)) & 1u; }
    void set_bit(std::uint32_t j) { words[j >> 6] |= std::uint64_t(1) << (j & 63); }

    bool operator==(const SeedHash& o) const { return nbits == o.nbits && words == o.words; }
};

inline std::uint32_t hamming(const SeedHash& a, const SeedHash& b) {
    if (a.nbits != b.nbits) throw std::invalid_argument("hamming: width mismatch");
    std::uint32_t d = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w)
        d += static_cast<std::uint32_t>(std::popcount(a.words[w] ^ b.words[w]));
    return d;
}

struct LshNoiseParams {
    double read_noise_stdv = 0.0;  // uS added per device access
};

// Random-hyperplane hash of an m-length analog seed. Noise-free reads take
// the cached-difference path, bit j = [a . G_eff[:,j] > 0], which is the
// bit-exact counterpart of effective_matrix(). Noisy reads sum the two column
// currents separately with a fresh eta per device access (even access drawn
// before odd within each row). Ties produce 0 either way.
inline SeedHash hash_seed(std::span<const double> seed, const CrossbarMatrix& cb,
                          const LshNoiseParams& noise = {}, Rng* rng = nullptr) {
    if (seed.size() != cb.m)
        throw std::invalid_argument("hash_seed: seed length " + std::to_string(seed.size()) +
                                    " != crossbar m " + std::to_string(cb.m));
    const bool noisy = noise.read_noise_stdv > 0.0;
    if (noisy && rng == nullptr) throw std::invalid_argument("hash_seed: noisy read needs an rng");

    SeedHash h;
    h.nbits = cb.bits;
    h.words.assign(SeedHash::word_count(cb.bits), 0);
    for (std::uint32_t j = 0; j < cb.bits; ++j) {
        if (!noisy) {
            double acc = 0.0;
            for (std::uint32_t i = 0; i < cb.m; ++i) acc += seed[i] * cb.eff(i, j);
            if (acc > 0.0) h.set_bit(j);
        } else {
            double even = 0.0, odd = 0.0;
            for (std::uint32_t i = 0; i < cb.m; ++i) {
                even += seed[i] * (cb.cond(i, 2 * j) + noise.read_noise_stdv * rng->normal());
                odd += seed[i] * (cb.cond(i, 2 * j + 1) + noise.read_noise_stdv * rng->normal());
            }
            if (even > odd) h.set_bit(j);
        }
    }
    return h;
}

}  // namespace memvote
