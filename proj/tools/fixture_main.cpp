// Generates synthetic test fixtures: a k-mer level table with uniformly
// scattered levels, and random ACGT references. Both are deterministic in
// --seed, so tests can regenerate identical inputs anywhere.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "memvote/common.hpp"
#include "memvote/pore_model.hpp"
#include "memvote/rng.hpp"

namespace {

constexpr const char* kUsage =
    "usage: memvote-fixture model --out FILE --seed N [--k 6] [--level-lo 60]\n"
    "                             [--level-hi 120] [--stdv 2]\n"
    "       memvote-fixture fasta --out FILE --seed N --contigs id:len[,id:len...]\n";

struct Args {
    std::string out;
    std::string contigs;
    std::uint64_t seed = 1;
    int k = 6;
    double level_lo = 60.0;
    double level_hi = 120.0;
    double stdv = 2.0;
};

Args parse(const std::vector<std::string>& argv, std::size_t first) {
    Args a;
    for (std::size_t i = first; i < argv.size(); ++i) {
        const std::string& tok = argv[i];
        auto value = [&]() -> std::string {
            if (i + 1 >= argv.size()) throw std::invalid_argument("flag " + tok + " needs a value");
            return argv[++i];
        };
        if (tok == "--out") a.out = value();
        else if (tok == "--contigs") a.contigs = value();
        else if (tok == "--seed") {
            if (!memvote::parse_u64(value(), a.seed)) throw std::invalid_argument("bad --seed");
        } else if (tok == "--k") {
            std::int64_t v;
            if (!memvote::parse_i64(value(), v) || v < 1 || v > 12)
                throw std::invalid_argument("bad --k (want 1..12)");
            a.k = static_cast<int>(v);
        } else if (tok == "--level-lo") {
            if (!memvote::parse_double(value(), a.level_lo)) throw std::invalid_argument("bad --level-lo");
        } else if (tok == "--level-hi") {
            if (!memvote::parse_double(value(), a.level_hi)) throw std::invalid_argument("bad --level-hi");
        } else if (tok == "--stdv") {
            if (!memvote::parse_double(value(), a.stdv)) throw std::invalid_argument("bad --stdv");
        } else {
            throw std::invalid_argument("unknown flag '" + tok + "'");
        }
    }
    if (a.out.empty()) throw std::invalid_argument("missing --out");
    return a;
}

int make_model(const Args& a) {
    if (!(a.level_lo < a.level_hi)) throw std::invalid_argument("--level-lo must be below --level-hi");
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw memvote::IoError("cannot write " + a.out);
    memvote::Rng rng(a.seed);
    out << "kmer\tlevel_mean\tlevel_stdv\n";
    const std::size_t n = std::size_t(1) << (2 * a.k);
    char buf[64];
    for (std::size_t r = 0; r < n; ++r) {
        double level = a.level_lo + (a.level_hi - a.level_lo) * rng.uniform();
        std::snprintf(buf, sizeof buf, "%.6f\t%.6f", level, a.stdv);
        out << memvote::rank_to_kmer(static_cast<std::int64_t>(r), a.k) << '\t' << buf << '\n';
    }
    if (!out) throw memvote::IoError("short write to " + a.out);
    std::cout << "model\t" << a.out << "\tkmers=" << n << "\tseed=" << a.seed << "\n";
    return 0;
}

int make_fasta(const Args& a) {
    if (a.contigs.empty()) throw std::invalid_argument("missing --contigs id:len[,id:len...]");
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw memvote::IoError("cannot write " + a.out);
    memvote::Rng rng(a.seed);
    static const char kBases[4] = {'A', 'C', 'G', 'T'};
    std::uint64_t total = 0;
    std::size_t n_contigs = 0;
    for (auto spec : memvote::split(a.contigs, ',')) {
        std::size_t colon = spec.rfind(':');
        if (colon == std::string_view::npos || colon == 0)
            throw std::invalid_argument("bad contig spec '" + std::string(spec) + "' (want id:len)");
        std::string id(spec.substr(0, colon));
        std::uint64_t len;
        if (!memvote::parse_u64(spec.substr(colon + 1), len) || len == 0)
            throw std::invalid_argument("bad contig length in '" + std::string(spec) + "'");
        out << '>' << id << '\n';
        for (std::uint64_t i = 0; i < len; ++i) {
            out << kBases[rng.uniform_int(4)];
            if ((i + 1) % 70 == 0) out << '\n';
        }
        if (len % 70 != 0) out << '\n';
        total += len;
        ++n_contigs;
    }
    if (!out) throw memvote::IoError("short write to " + a.out);
    std::cout << "fasta\t" << a.out << "\tcontigs=" << n_contigs << "\tbases=" << total
              << "\tseed=" << a.seed << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (args.empty() || args[0] == "--help" || args[0] == "help") {
            std::cout << kUsage;
            return args.empty() ? 2 : 0;
        }
        Args a = parse(args, 1);
        if (args[0] == "model") return make_model(a);
        if (args[0] == "fasta") return make_fasta(a);
        throw std::invalid_argument("unknown mode '" + args[0] + "'");
    } catch (const std::exception& e) {
        std::cerr << "memvote-fixture: " << e.what() << "\n";
        return 2;
    }
}
