#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "memvote/aligner.hpp"
#include "memvote/common.hpp"

// Versioned binary index container (little-endian, layout in docs/FORMATS.md):
// a config snapshot, the hashing crossbar conductances, then one CAM blob per
// species (packed stored bits, float32 device conductances, bucket map).
// Derived read-path caches are rebuilt on load, not stored.

namespace memvote {

inline constexpr std::uint32_t kIndexMagic = 0x5849564du;  // "MVIX"
inline constexpr std::uint16_t kIndexVersion = 1;

namespace detail {

class BinWriter {
public:
    explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot write " + path);
    }
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    template <typename T>
    void put_array(const std::vector<T>& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        put(static_cast<std::uint64_t>(v.size()));
        out_.write(reinterpret_cast<const char*>(v.data()),
                   static_cast<std::streamsize>(v.size() * sizeof(T)));
    }
    void put_string(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void finish() {
        out_.flush();
        if (!out_) throw IoError("short write to " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open " + path);
    }
    template <typename T>
    T get() {
        T v;
        in_.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in_) throw ParseError(path_, 0, "truncated index file");
        return v;
    }
    template <typename T>
    std::vector<T> get_array(std::uint64_t max_elems = std::uint64_t(1) << 32) {
        auto n = get<std::uint64_t>();
        if (n > max_elems) throw ParseError(path_, 0, "implausible array size in index");
        std::vector<T> v(n);
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
        if (!in_) throw ParseError(path_, 0, "truncated index file");
        return v;
    }
    std::string get_string() {
        auto n = get<std::uint32_t>();
        if (n > (1u << 20)) throw ParseError(path_, 0, "implausible string size in index");
        std::string s(n, '\0');
        in_.read(s.data(), n);
        if (!in_) throw ParseError(path_, 0, "truncated index file");
        return s;
    }

private:
    std::string path_;
    std::ifstream in_;
};

}  // namespace detail

inline void save_index(const std::string& path, const ReferenceIndex& idx) {
    detail::BinWriter w(path);
    w.put(kIndexMagic);
    w.put(kIndexVersion);
    w.put(std::uint16_t{0});  // flags

    const AlignConfig& c = idx.cfg;
    w.put(c.m);
    w.put(c.hash_bits);
    w.put(c.bucket_size);
    w.put(c.cam_threshold);
    w.put(c.votes_min);
    w.put(c.max_samples);
    w.put(c.diff_threshold);
    w.put(std::uint8_t(c.center_seeds));
    w.put(std::uint8_t(c.normalize));
    w.put(std::uint8_t(c.backend == SearchBackend::Digital ? 1 : 0));
    w.put(std::uint8_t(c.crossbar.kind == CrossbarDist::Kind::IdealGaussian ? 1 : 0));
    w.put(c.crossbar.median_us);
    w.put(c.crossbar.sigma_log);
    w.put(c.crossbar.max_us);
    w.put(c.detector.short_window);
    w.put(c.detector.long_window);
    w.put(c.detector.t_threshold_short);
    w.put(c.detector.t_threshold_long);
    w.put(c.detector.min_event_len);
    w.put(c.detector.diff_threshold);

    const DeviceModel& d = idx.dev;
    w.put(d.g_on_target);
    w.put(d.g_off_target);
    w.put(d.write_tolerance);
    w.put(d.variation_stdv);
    w.put(d.v_read);
    w.put(d.outlier_rate);

    w.put(idx.seed_crossbar);
    w.put(idx.seed_cam);
    w.put(std::int32_t(idx.model_k));
    w.put(idx.model_global_mean);
    w.put(idx.model_global_stdv);

    w.put(idx.crossbar.m);
    w.put(idx.crossbar.bits);
    w.put(idx.crossbar.rng_seed);
    w.put_array(idx.crossbar.conductance);

    w.put(static_cast<std::uint32_t>(idx.species.size()));
    for (const auto& sp : idx.species) {
        w.put_string(sp.id);
        w.put(sp.n_events);
        w.put(sp.n_buckets);
        w.put(sp.cam.n_rows);
        w.put(sp.cam.bits);
        w.put_array(sp.cam.stored);
        w.put_array(sp.cam.g);
        w.put_array(sp.cam.row_bucket);
    }
    w.finish();
}

inline ReferenceIndex load_index(const std::string& path) {
    detail::BinReader r(path);
    if (r.get<std::uint32_t>() != kIndexMagic)
        throw ParseError(path, 0, "not a memvote index (bad magic)");
    auto version = r.get<std::uint16_t>();
    if (version != kIndexVersion)
        throw VersionError(path + ": index version " + std::to_string(version) +
                           " unsupported (expected " + std::to_string(kIndexVersion) + ")");
    r.get<std::uint16_t>();  // flags

    ReferenceIndex idx;
    AlignConfig& c = idx.cfg;
    c.m = r.get<std::uint32_t>();
    c.hash_bits = r.get<std::uint32_t>();
    c.bucket_size = r.get<std::uint32_t>();
    c.cam_threshold = r.get<std::int32_t>();
    c.votes_min = r.get<std::uint32_t>();
    c.max_samples = r.get<std::uint32_t>();
    c.diff_threshold = r.get<double>();
    c.center_seeds = r.get<std::uint8_t>() != 0;
    c.normalize = r.get<std::uint8_t>() != 0;
    c.backend = r.get<std::uint8_t>() ? SearchBackend::Digital : SearchBackend::Analog;
    c.crossbar.kind =
        r.get<std::uint8_t>() ? CrossbarDist::Kind::IdealGaussian : CrossbarDist::Kind::Lognormal;
    c.crossbar.median_us = r.get<double>();
    c.crossbar.sigma_log = r.get<double>();
    c.crossbar.max_us = r.get<double>();
    c.detector.short_window = r.get<std::uint32_t>();
    c.detector.long_window = r.get<std::uint32_t>();
    c.detector.t_threshold_short = r.get<double>();
    c.detector.t_threshold_long = r.get<double>();
    c.detector.min_event_len = r.get<std::uint32_t>();
    c.detector.diff_threshold = r.get<double>();

    DeviceModel& d = idx.dev;
    d.g_on_target = r.get<double>();
    d.g_off_target = r.get<double>();
    d.write_tolerance = r.get<double>();
    d.variation_stdv = r.get<double>();
    d.v_read = r.get<double>();
    d.outlier_rate = r.get<double>();

    idx.seed_crossbar = r.get<std::uint64_t>();
    idx.seed_cam = r.get<std::uint64_t>();
    idx.model_k = r.get<std::int32_t>();
    idx.model_global_mean = r.get<double>();
    idx.model_global_stdv = r.get<double>();

    idx.crossbar.m = r.get<std::uint32_t>();
    idx.crossbar.bits = r.get<std::uint32_t>();
    idx.crossbar.rng_seed = r.get<std::uint64_t>();
    idx.crossbar.dist = c.crossbar;
    idx.crossbar.conductance = r.get_array<float>();
    if (idx.crossbar.conductance.size() != std::size_t(idx.crossbar.m) * 2 * idx.crossbar.bits)
        throw ParseError(path, 0, "crossbar blob size mismatch");
    idx.crossbar.rebuild_eff();

    auto n_species = r.get<std::uint32_t>();
    for (std::uint32_t s = 0; s < n_species; ++s) {
        SpeciesIndex sp;
        sp.id = r.get_string();
        sp.n_events = r.get<std::uint32_t>();
        sp.n_buckets = r.get<std::uint32_t>();
        sp.cam.n_rows = r.get<std::uint32_t>();
        sp.cam.bits = r.get<std::uint32_t>();
        sp.cam.dev = idx.dev;
        sp.cam.stored = r.get_array<std::uint64_t>();
        sp.cam.g = r.get_array<float>();
        sp.cam.row_bucket = r.get_array<std::uint32_t>();
        if (sp.cam.stored.size() != std::size_t(sp.cam.n_rows) * sp.cam.words_per_row() ||
            sp.cam.g.size() != std::size_t(sp.cam.n_rows) * 2 * sp.cam.bits ||
            sp.cam.row_bucket.size() != sp.cam.n_rows)
            throw ParseError(path, 0, "CAM blob size mismatch for species '" + sp.id + "'");
        sp.cam.rebuild_cache();
        idx.species.push_back(std::move(sp));
    }
    return idx;
}

}  // namespace memvote
