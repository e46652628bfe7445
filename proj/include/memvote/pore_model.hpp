#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "memvote/common.hpp"

namespace memvote {

// A..T -> 0..3, anything else -> -1.
inline int base_rank(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return -1;
    }
}

// Lexicographic rank of a k-mer, -1 on any non-ACGT character.
inline std::int64_t kmer_rank(std::string_view kmer) {
    std::int64_t r = 0;
    for (char c : kmer) {
        int b = base_rank(c);
        if (b < 0) return -1;
        r = r * 4 + b;
    }
    return r;
}

inline std::string rank_to_kmer(std::int64_t rank, int k) {
    std::string s(static_cast<std::size_t>(k), 'A');
    for (int i = k - 1; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = "ACGT"[rank & 3];
        rank >>= 2;
    }
    return s;
}

// Expected pore current per k-mer, indexed by lexicographic rank.
struct PoreModel {
    int k = 0;
    std::vector<float> level_mean;   // 4^k entries, NaN where absent
    std::vector<float> level_stdv;   // empty, or 4^k entries (NaN where absent)
    std::size_t n_levels = 0;
    bool complete = false;           // all 4^k k-mers present
    double global_mean = 0.0;        // over present levels
    double global_stdv = 0.0;        // population stdv over present levels

    std::size_t table_size() const { return level_mean.size(); }
    bool has(std::int64_t rank) const {
        return rank >= 0 && static_cast<std::size_t>(rank) < level_mean.size() &&
               !std::isnan(level_mean[static_cast<std::size_t>(rank)]);
    }
    double level(std::int64_t rank) const { return level_mean[static_cast<std::size_t>(rank)]; }
};

// Loads a tab-separated model table. Required header columns: "kmer" and
// "level_mean"; "level_stdv" is kept when present; other columns are ignored.
// Duplicate k-mers and levels outside (0,300) pA are errors. A table covering
// fewer than 4^k k-mers loads with complete=false; encode_reference reports
// the missing k-mer if one is ever needed.
inline PoreModel load_pore_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pore model: " + path);

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty pore model file");
    ++line_no;

    auto header = split(strip(line), '\t');
    int col_kmer = -1, col_mean = -1, col_stdv = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "kmer") col_kmer = static_cast<int>(i);
        else if (header[i] == "level_mean") col_mean = static_cast<int>(i);
        else if (header[i] == "level_stdv") col_stdv = static_cast<int>(i);
    }
    if (col_kmer < 0 || col_mean < 0)
        throw ParseError(path, 1, "header must name 'kmer' and 'level_mean' columns");

    PoreModel model;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty()) continue;
        auto fields = split(row, '\t');
        std::size_t need = static_cast<std::size_t>(std::max(col_kmer, col_mean)) + 1;
        if (fields.size() < need)
            throw ParseError(path, line_no, "expected at least " + std::to_string(need) + " columns");

        std::string_view kmer = fields[static_cast<std::size_t>(col_kmer)];
        if (model.k == 0) {
            if (kmer.empty()) throw ParseError(path, line_no, "empty k-mer");
            model.k = static_cast<int>(kmer.size());
            if (model.k > 12) throw ParseError(path, line_no, "k-mer length above 12 unsupported");
            std::size_t n = std::size_t(1) << (2 * model.k);
            model.level_mean.assign(n, std::numeric_limits<float>::quiet_NaN());
            if (col_stdv >= 0) model.level_stdv.assign(n, std::numeric_limits<float>::quiet_NaN());
        }
        if (kmer.size() != static_cast<std::size_t>(model.k))
            throw ParseError(path, line_no, "k-mer length differs from first row");
        std::int64_t rank = kmer_rank(kmer);
        if (rank < 0) throw ParseError(path, line_no, "k-mer has characters outside ACGT: " + std::string(kmer));
        if (!std::isnan(model.level_mean[static_cast<std::size_t>(rank)]))
            throw ParseError(path, line_no, "duplicate k-mer: " + std::string(kmer));

        double mean;
        if (!parse_double(fields[static_cast<std::size_t>(col_mean)], mean))
            throw ParseError(path, line_no, "bad level_mean value");
        if (!(mean > 0.0 && mean < 300.0))
            throw ParseError(path, line_no, "level_mean outside (0,300) pA: " + std::to_string(mean));
        model.level_mean[static_cast<std::size_t>(rank)] = static_cast<float>(mean);

        if (col_stdv >= 0 && static_cast<std::size_t>(col_stdv) < fields.size()) {
            double stdv;
            if (!parse_double(fields[static_cast<std::size_t>(col_stdv)], stdv) || stdv < 0.0)
                throw ParseError(path, line_no, "bad level_stdv value");
            model.level_stdv[static_cast<std::size_t>(rank)] = static_cast<float>(stdv);
        }
        ++model.n_levels;
    }
    if (model.k == 0) throw ParseError(path, line_no, "pore model has no k-mer rows");

    model.complete = (model.n_levels == model.table_size());
    double sum = 0.0, sumsq = 0.0;
    for (float v : model.level_mean) {
        if (std::isnan(v)) continue;
        sum += v;
        sumsq += double(v) * v;
    }
    model.global_mean = sum / double(model.n_levels);
    double var = sumsq / double(model.n_levels) - model.global_mean * model.global_mean;
    model.global_stdv = std::sqrt(var > 0 ? var : 0);
    return model;
}

struct ReferenceSequence {
    std::string id;
    std::string bases;  // uppercase ACGT only once N policy has been applied
};

enum class AmbigPolicy {
    Reject,  // any N is an error
    Split,   // split records at N runs into contigs "<id>:<offset>"
};

// FASTA reader. Lowercase is uppercased; characters outside {A,C,G,T,N} are
// errors naming the record and 0-based offset within its sequence.
inline std::vector<ReferenceSequence> parse_fasta(const std::string& path,
                                                  AmbigPolicy policy = AmbigPolicy::Reject) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open FASTA: " + path);

    std::vector<ReferenceSequence> records;
    std::string line, id, seq;
    std::size_t line_no = 0;
    bool have_record = false;

    auto flush = [&]() {
        if (!have_record) return;
        if (id.empty()) throw ParseError(path, 0, "FASTA record with empty name");
        if (seq.empty()) throw ParseError(path, 0, "FASTA record '" + id + "' has no sequence");
        if (policy == AmbigPolicy::Reject) {
            std::size_t n_at = seq.find('N');
            if (n_at != std::string::npos)
                throw ParseError(path, 0, "record '" + id + "' has ambiguous base N at offset " +
                                              std::to_string(n_at) + " (policy: reject)");
            records.push_back({id, seq});
        } else {
            std::size_t pos = 0;
            while (pos < seq.size()) {
                std::size_t start = seq.find_first_not_of('N', pos);
                if (start == std::string::npos) break;
                std::size_t end = seq.find('N', start);
                if (end == std::string::npos) end = seq.size();
                std::string part = seq.substr(start, end - start);
                std::string part_id = (start == 0 && end == seq.size())
                                          ? id
                                          : id + ":" + std::to_string(start);
                records.push_back({part_id, std::move(part)});
                pos = end;
            }
        }
        id.clear();
        seq.clear();
        have_record = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty()) continue;
        if (row[0] == '>') {
            flush();
            have_record = true;
            std::string_view name = row.substr(1);
            std::size_t sp = name.find_first_of(" \t");
            if (sp != std::string_view::npos) name = name.substr(0, sp);
            id = std::string(name);
        } else {
            if (!have_record) throw ParseError(path, line_no, "sequence before first FASTA header");
            for (char c : row) {
                char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                if (base_rank(u) < 0 && u != 'N')
                    throw ParseError(path, line_no,
                                     "record '" + id + "' has invalid base '" + std::string(1, c) +
                                         "' at offset " + std::to_string(seq.size()));
                seq.push_back(u);
            }
        }
    }
    flush();
    if (records.empty()) throw ParseError(path, line_no, "no FASTA records");
    return records;
}

// Expected analog event sequence of a reference: one pA level per k-mer.
struct ExpectedEventVector {
    std::vector<double> values;
    std::string source_id;
    std::uint32_t origin = 0;  // base offset of values[0] in the source record
};

// |bases| - k + 1 expected events. Unknown or model-absent k-mers are errors
// naming the k-mer and its base position.
inline ExpectedEventVector encode_reference(const ReferenceSequence& ref, const PoreModel& model,
                                            std::uint32_t origin = 0) {
    if (model.k <= 0) throw std::invalid_argument("encode_reference: model has no k");
    std::size_t k = static_cast<std::size_t>(model.k);
    if (ref.bases.size() < k)
        throw std::invalid_argument("encode_reference: record '" + ref.id + "' shorter than k");

    ExpectedEventVector out;
    out.source_id = ref.id;
    out.origin = origin;
    out.values.reserve(ref.bases.size() - k + 1);
    for (std::size_t i = 0; i + k <= ref.bases.size(); ++i) {
        std::string_view kmer(ref.bases.data() + i, k);
        std::int64_t rank = kmer_rank(kmer);
        if (rank < 0)
            throw std::invalid_argument("record '" + ref.id + "': k-mer '" + std::string(kmer) +
                                        "' at base position " + std::to_string(origin + i) +
                                        " has non-ACGT characters");
        if (!model.has(rank))
            throw std::invalid_argument("record '" + ref.id + "': k-mer '" + std::string(kmer) +
                                        "' at base position " + std::to_string(origin + i) +
                                        " is absent from the pore model");
        out.values.push_back(model.level(rank));
    }
    return out;
}

}  // namespace memvote
