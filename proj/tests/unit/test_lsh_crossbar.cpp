#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "memvote/lsh_crossbar.hpp"
#include "memvote/rng.hpp"

using namespace memvote;

TEST_CASE("crossbar generation is deterministic and bounded", "[lsh_crossbar]") {
    CrossbarMatrix a = generate_crossbar(10, 128, CrossbarDist::lognormal(), 99);
    CrossbarMatrix b = generate_crossbar(10, 128, CrossbarDist::lognormal(), 99);
    REQUIRE(a.conductance == b.conductance);
    CrossbarMatrix c = generate_crossbar(10, 128, CrossbarDist::lognormal(), 100);
    REQUIRE(a.conductance != c.conductance);
    for (float g : a.conductance) {
        REQUIRE(g >= 0.0f);
        REQUIRE(g <= 60.0f);
    }
}

TEST_CASE("conductance pairs cancel to a near zero-mean matrix", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(40, 32, CrossbarDist::lognormal(), 7);
    REQUIRE(cb.conductance.size() == 40u * 64u);
    const std::vector<float>& g = effective_matrix(cb);
    REQUIRE(g.size() == 40u * 32u);
    double mean = 0.0;
    for (float v : g) mean += v;
    mean /= double(g.size());
    REQUIRE(std::abs(mean) < 0.5);
}

TEST_CASE("effective entries are the column-pair differences", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(6, 17, CrossbarDist::lognormal(), 8);
    cb.conductance[0] = 5.0f;  // row 0, column 0 pair
    cb.conductance[1] = 2.0f;
    cb.rebuild_eff();
    const std::vector<float>& g = effective_matrix(cb);
    REQUIRE(g[0] == 3.0f);
    for (std::uint32_t i = 0; i < cb.m; ++i)
        for (std::uint32_t j = 0; j < cb.bits; ++j)
            REQUIRE(g[i * cb.bits + j] == cb.cond(i, 2 * j) - cb.cond(i, 2 * j + 1));
}

TEST_CASE("equal pairs give an all-zero effective matrix", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(4, 8, CrossbarDist::lognormal(), 9);
    std::fill(cb.conductance.begin(), cb.conductance.end(), 5.0f);
    cb.rebuild_eff();
    for (float v : effective_matrix(cb)) REQUIRE(v == 0.0f);
}

TEST_CASE("ideal backend recovers unit Gaussian differences", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(100, 1000, CrossbarDist::ideal_gaussian(), 10);
    const std::vector<float>& g = effective_matrix(cb);
    double sum = 0.0, sumsq = 0.0;
    for (float v : g) {
        sum += v;
        sumsq += double(v) * v;
        // rectified split: one device of each pair is exactly zero
    }
    double mean = sum / double(g.size());
    double stdv = std::sqrt(sumsq / double(g.size()) - mean * mean);
    REQUIRE(std::abs(mean) < 0.05);
    REQUIRE(std::abs(stdv - 1.0) < 0.05);
    for (std::size_t i = 0; i < cb.conductance.size(); i += 2)
        REQUIRE(std::min(cb.conductance[i], cb.conductance[i + 1]) == 0.0f);
}

TEST_CASE("hashing is deterministic and scale-invariant at zero noise", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(10, 128, CrossbarDist::lognormal(), 11);
    Rng rng(12);
    std::vector<double> seed(10);
    for (double& v : seed) v = 60.0 + 60.0 * rng.uniform();

    SeedHash h1 = hash_seed(seed, cb);
    SeedHash h2 = hash_seed(seed, cb);
    REQUIRE(h1 == h2);

    std::vector<double> doubled = seed;
    for (double& v : doubled) v *= 2.0;
    REQUIRE(hash_seed(doubled, cb) == h1);

    std::vector<double> wrong(9, 1.0);
    REQUIRE_THROWS_AS(hash_seed(wrong, cb), std::invalid_argument);
}

TEST_CASE("zero-noise hash equals the sign of the effective projection", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(10, 256, CrossbarDist::lognormal(), 13);
    const std::vector<float>& g = effective_matrix(cb);
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> seed(10);
        for (double& v : seed) v = -5.0 + 10.0 * rng.uniform();
        SeedHash h = hash_seed(seed, cb);
        for (std::uint32_t j = 0; j < cb.bits; ++j) {
            double acc = 0.0;
            for (std::uint32_t i = 0; i < cb.m; ++i) acc += seed[i] * g[i * cb.bits + j];
            REQUIRE(h.bit(j) == (acc > 0.0));
        }
    }
}

TEST_CASE("noisy hashing needs an rng and perturbs bits", "[lsh_crossbar]") {
    CrossbarMatrix cb = generate_crossbar(10, 512, CrossbarDist::lognormal(), 15);
    Rng rng(16);
    std::vector<double> seed(10);
    for (double& v : seed) v = 60.0 + 60.0 * rng.uniform();

    LshNoiseParams noise;
    noise.read_noise_stdv = 5.0;
    REQUIRE_THROWS_AS(hash_seed(seed, cb, noise, nullptr), std::invalid_argument);

    Rng n1(17), n2(17), n3(18);
    SeedHash a = hash_seed(seed, cb, noise, &n1);
    SeedHash b = hash_seed(seed, cb, noise, &n2);
    REQUIRE(a == b);

    // Heavy device noise must flip at least one of 512 bits.
    LshNoiseParams heavy;
    heavy.read_noise_stdv = 200.0;
    SeedHash c = hash_seed(seed, cb, heavy, &n3);
    SeedHash clean = hash_seed(seed, cb);
    REQUIRE(hamming(c, clean) > 0);
}

TEST_CASE("hamming distance checks widths and counts bits", "[lsh_crossbar]") {
    SeedHash a, b;
    a.nbits = b.nbits = 70;
    a.words.assign(SeedHash::word_count(70), 0);
    b.words.assign(SeedHash::word_count(70), 0);
    a.set_bit(0);
    a.set_bit(69);
    b.set_bit(69);
    REQUIRE(hamming(a, b) == 1);
    REQUIRE(a.bit(0));
    REQUIRE_FALSE(b.bit(0));
    REQUIRE(a.bit(69));

    SeedHash c;
    c.nbits = 64;
    c.words.assign(1, 0);
    REQUIRE_THROWS_AS(hamming(a, c), std::invalid_argument);
}

TEST_CASE("hamming fraction follows the hyperplane angle law", "[lsh_crossbar]") {
    // Two-dimensional seeds with a known angle between them; each hash bit is
    // an independent random hyperplane, so the expected disagreement fraction
    // is angle / pi.
    const std::uint32_t bits = 16384;
    CrossbarMatrix cb = generate_crossbar(2, bits, CrossbarDist::ideal_gaussian(), 19);
    const double pi = 3.14159265358979323846;
    for (double theta : {0.0, pi / 6.0, pi / 3.0, pi / 2.0}) {
        std::vector<double> a{1.0, 0.0};
        std::vector<double> b{std::cos(theta), std::sin(theta)};
        double frac = double(hamming(hash_seed(a, cb), hash_seed(b, cb))) / double(bits);
        REQUIRE(std::abs(frac - theta / pi) < 0.03);
    }
}
