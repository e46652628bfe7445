#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "memvote/pore_model.hpp"
#include "memvote/rng.hpp"

namespace test_helpers {

// Complete synthetic k-mer table with levels scattered uniformly in [lo, hi).
inline memvote::PoreModel synth_model(std::uint64_t seed, int k = 6, double lo = 60.0,
                                      double hi = 120.0, float stdv = 2.0f) {
    memvote::PoreModel model;
    model.k = k;
    const std::size_t n = std::size_t(1) << (2 * k);
    model.level_mean.resize(n);
    model.level_stdv.assign(n, stdv);
    memvote::Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = lo + (hi - lo) * rng.uniform();
        model.level_mean[i] = static_cast<float>(v);
        sum += model.level_mean[i];
        sumsq += double(model.level_mean[i]) * model.level_mean[i];
    }
    model.n_levels = n;
    model.complete = true;
    model.global_mean = sum / double(n);
    double var = sumsq / double(n) - model.global_mean * model.global_mean;
    model.global_stdv = var > 0 ? std::sqrt(var) : 0.0;
    return model;
}

inline std::string random_bases(memvote::Rng& rng, std::size_t n) {
    static const char kBases[4] = {'A', 'C', 'G', 'T'};
    std::string s(n, 'A');
    for (std::size_t i = 0; i < n; ++i) s[i] = kBases[rng.uniform_int(4)];
    return s;
}

// Fresh empty directory under the test working directory.
inline std::string test_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::path("test_tmp") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Writes a complete model table matching synth_model(seed) to a file.
inline void write_model_file(const std::string& path, std::uint64_t seed, int k = 6,
                             double lo = 60.0, double hi = 120.0, float stdv = 2.0f) {
    memvote::PoreModel model = synth_model(seed, k, lo, hi, stdv);
    std::ofstream out(path, std::ios::binary);
    out << "kmer\tlevel_mean\tlevel_stdv\n";
    char buf[64];
    for (std::size_t r = 0; r < model.table_size(); ++r) {
        std::snprintf(buf, sizeof buf, "%.6f\t%.6f", double(model.level_mean[r]), double(stdv));
        out << memvote::rank_to_kmer(static_cast<std::int64_t>(r), k) << '\t' << buf << '\n';
    }
}

}  // namespace test_helpers
