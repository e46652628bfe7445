#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "memvote/common.hpp"
#include "memvote/event_detector.hpp"
#include "memvote/signal_sim.hpp"

// On-disk signal formats. Both are specified bit-exactly in docs/FORMATS.md:
//   text:   "#memvote signals v1" header, one read per row,
//           read_id <TAB> sample_rate <TAB> comma-separated samples
//           (samples printed with %.9g, which round-trips binary32)
//   binary: <path> holds the concatenated raw little-endian float32 samples
//           of all reads; <path>.hdr is a text sidecar mapping read_id to
//           (sample_rate, offset, count).

namespace memvote {

static_assert(std::endian::native == std::endian::little,
              "binary signal and index formats are little-endian");

inline constexpr const char* kSignalsTextMagic = "#memvote signals v1";
inline constexpr const char* kSignalsBinMagic = "#memvote sigbin v1";
inline constexpr const char* kManifestMagic = "#memvote manifest v1";

inline void write_signals_text(const std::string& path, const std::vector<RawSignal>& reads) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << kSignalsTextMagic << "\n#read_id\tsample_rate\tsamples\n";
    char buf[32];
    for (const auto& r : reads) {
        out << r.read_id << '\t';
        std::snprintf(buf, sizeof buf, "%.9g", r.sample_rate);
        out << buf << '\t';
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9g", double(r.samples[i]));
            if (i) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path);
}

inline std::vector<RawSignal> read_signals_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<RawSignal> reads;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty()) continue;
        if (row[0] == '#') {
            if (first && row.substr(0, 17) == "#memvote signals " && row != kSignalsTextMagic)
                throw VersionError(path + ": unsupported signal text version '" + std::string(row) + "'");
            first = false;
            continue;
        }
        first = false;
        auto fields = split(row, '\t');
        if (fields.size() != 3) throw ParseError(path, line_no, "expected 3 tab-separated fields");
        RawSignal sig;
        sig.read_id = std::string(fields[0]);
        if (sig.read_id.empty()) throw ParseError(path, line_no, "empty read_id");
        if (!parse_double(fields[1], sig.sample_rate) || !(sig.sample_rate > 0))
            throw ParseError(path, line_no, "bad sample_rate");
        for (auto tok : split(fields[2], ',')) {
            double v;
            if (!parse_double(tok, v)) throw ParseError(path, line_no, "bad sample value");
            sig.samples.push_back(static_cast<float>(v));
        }
        if (sig.samples.empty()) throw ParseError(path, line_no, "read with no samples");
        reads.push_back(std::move(sig));
    }
    return reads;
}

inline void write_signals_binary(const std::string& path, const std::vector<RawSignal>& reads) {
    std::ofstream data(path, std::ios::binary);
    if (!data) throw IoError("cannot write " + path);
    std::ofstream hdr(path + ".hdr", std::ios::binary);
    if (!hdr) throw IoError("cannot write " + path + ".hdr");
    hdr << kSignalsBinMagic << "\n#read_id\tsample_rate\toffset\tcount\n";
    char buf[32];
    std::uint64_t offset = 0;
    for (const auto& r : reads) {
        data.write(reinterpret_cast<const char*>(r.samples.data()),
                   static_cast<std::streamsize>(r.samples.size() * sizeof(float)));
        hdr << r.read_id << '\t';
        std::snprintf(buf, sizeof buf, "%.9g", r.sample_rate);
        hdr << buf << '\t' << offset << '\t' << r.samples.size() << '\n';
        offset += r.samples.size();
    }
    if (!data || !hdr) throw IoError("short write to " + path);
}

inline std::vector<RawSignal> read_signals_binary(const std::string& path) {
    std::ifstream hdr(path + ".hdr", std::ios::binary);
    if (!hdr) throw IoError("cannot open " + path + ".hdr");
    std::ifstream data(path, std::ios::binary);
    if (!data) throw IoError("cannot open " + path);

    std::vector<RawSignal> reads;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(hdr, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty()) continue;
        if (row[0] == '#') {
            if (first && row.substr(0, 16) == "#memvote sigbin " && row != kSignalsBinMagic)
                throw VersionError(path + ".hdr: unsupported sidecar version '" + std::string(row) + "'");
            first = false;
            continue;
        }
        first = false;
        auto fields = split(row, '\t');
        if (fields.size() != 4) throw ParseError(path + ".hdr", line_no, "expected 4 fields");
        RawSignal sig;
        sig.read_id = std::string(fields[0]);
        std::uint64_t offset, count;
        if (sig.read_id.empty() || !parse_double(fields[1], sig.sample_rate) ||
            !(sig.sample_rate > 0) || !parse_u64(fields[2], offset) || !parse_u64(fields[3], count) ||
            count == 0)
            throw ParseError(path + ".hdr", line_no, "bad sidecar row");
        sig.samples.resize(count);
        data.seekg(static_cast<std::streamoff>(offset * sizeof(float)));
        data.read(reinterpret_cast<char*>(sig.samples.data()),
                  static_cast<std::streamsize>(count * sizeof(float)));
        if (!data)
            throw ParseError(path, line_no, "sample range [" + std::to_string(offset) + ", +" +
                                                std::to_string(count) + ") outside data file");
        reads.push_back(std::move(sig));
    }
    return reads;
}

inline void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << kManifestMagic << "\n#read_id\tspecies\tstart\tlength\n";
    for (const auto& r : rows)
        out << r.read_id << '\t' << r.species << '\t' << r.start << '\t' << r.length << '\n';
    if (!out) throw IoError("short write to " + path);
}

inline std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<ManifestRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty() || row[0] == '#') continue;
        auto fields = split(row, '\t');
        if (fields.size() != 4) throw ParseError(path, line_no, "expected 4 fields");
        ManifestRow m;
        m.read_id = std::string(fields[0]);
        m.species = std::string(fields[1]);
        std::uint64_t start, length;
        if (m.read_id.empty() || m.species.empty() || !parse_u64(fields[2], start) ||
            !parse_u64(fields[3], length))
            throw ParseError(path, line_no, "bad manifest row");
        m.start = static_cast<std::uint32_t>(start);
        m.length = static_cast<std::uint32_t>(length);
        rows.push_back(std::move(m));
    }
    return rows;
}

}  // namespace memvote
