#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "memvote/aligner.hpp"
#include "memvote/common.hpp"

namespace memvote {

// Flat typed key-value run configuration. One registry serves the config
// file and the command line: every key is also a --key flag (dashes and
// underscores interchangeable), and flags win over file values.
struct RunConfig {
    AlignConfig align;
    DeviceModel dev;
    SimParams sim;
    LshNoiseParams lsh_noise;

    std::uint64_t seed_sim = 1;
    std::uint64_t seed_crossbar = 2;
    std::uint64_t seed_cam = 3;
    std::uint64_t seed_noise = 4;

    std::uint32_t threads = 1;
    std::uint32_t overlap_slack = 1;

    std::string reference, model, reads, index, out, truth, results;
    std::string signal_format = "text";  // text|binary
    std::string n_policy = "reject";     // reject|split
    std::string task = "map";            // sweep scoring mode: map|detect

    std::vector<std::uint32_t> counts;   // simulate: reads per record
    std::uint32_t read_length = 0;       // simulate: bases, 0 = whole record

    std::string sweep_cam = "0:32";
    std::string sweep_votes = "1:15";
    std::string sweep_samples;           // optional max_samples list

    std::set<std::string> explicit_keys;

    bool is_set(const std::string& key) const { return explicit_keys.count(key) != 0; }
};

namespace detail {

inline bool parse_bool(std::string_view v, bool& out) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") { out = true; return true; }
    if (v == "0" || v == "false" || v == "no" || v == "off") { out = false; return true; }
    return false;
}

template <typename T>
T checked_num(const std::string& key, std::string_view v) {
    if constexpr (std::is_same_v<T, double>) {
        double d;
        if (!parse_double(v, d)) throw std::invalid_argument("bad value for " + key + ": '" + std::string(v) + "'");
        return d;
    } else if constexpr (std::is_signed_v<T>) {
        std::int64_t i;
        if (!parse_i64(v, i)) throw std::invalid_argument("bad value for " + key + ": '" + std::string(v) + "'");
        return static_cast<T>(i);
    } else {
        std::uint64_t u;
        if (!parse_u64(v, u)) throw std::invalid_argument("bad value for " + key + ": '" + std::string(v) + "'");
        return static_cast<T>(u);
    }
}

inline bool checked_bool(const std::string& key, std::string_view v) {
    bool b;
    if (!parse_bool(v, b)) throw std::invalid_argument("bad value for " + key + ": '" + std::string(v) + "'");
    return b;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        // seed windows and voting
        "m", "hash_bits", "bucket_size", "cam_threshold", "votes_min", "max_samples",
        "diff_threshold", "center_seeds", "normalize", "backend",
        // hashing crossbar
        "crossbar_dist", "crossbar_median", "crossbar_sigma", "crossbar_max", "read_noise_stdv",
        // event detector
        "short_window", "long_window", "t_threshold_short", "t_threshold_long", "min_event_len",
        // CAM devices
        "g_on", "g_off", "write_tolerance", "variation_stdv", "v_read", "outlier_rate",
        // simulator
        "sample_rate", "bases_per_second", "dwell_dist", "dwell_mean", "dwell_min",
        "current_noise_stdv", "drift", "read_length", "counts",
        // seeds
        "seed_sim", "seed_crossbar", "seed_cam", "seed_noise",
        // run control
        "threads", "overlap_slack", "signal_format", "n_policy", "task",
        "sweep_cam", "sweep_votes", "sweep_samples",
        // paths
        "reference", "model", "reads", "index", "out", "truth", "results",
    };
    return keys;
}

// Applies one key=value pair. Unknown keys and malformed values are errors.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::checked_bool;
    using detail::checked_num;
    auto& a = cfg.align;

    if (key == "m") a.m = checked_num<std::uint32_t>(key, value);
    else if (key == "hash_bits") a.hash_bits = checked_num<std::uint32_t>(key, value);
    else if (key == "bucket_size") a.bucket_size = checked_num<std::uint32_t>(key, value);
    else if (key == "cam_threshold") a.cam_threshold = checked_num<std::int32_t>(key, value);
    else if (key == "votes_min") a.votes_min = checked_num<std::uint32_t>(key, value);
    else if (key == "max_samples") a.max_samples = checked_num<std::uint32_t>(key, value);
    else if (key == "diff_threshold") {
        a.diff_threshold = checked_num<double>(key, value);
        a.detector.diff_threshold = a.diff_threshold;
    } else if (key == "center_seeds") a.center_seeds = checked_bool(key, value);
    else if (key == "normalize") a.normalize = checked_bool(key, value);
    else if (key == "backend") a.backend = parse_backend(value);
    else if (key == "crossbar_dist") {
        if (value == "lognormal") a.crossbar.kind = CrossbarDist::Kind::Lognormal;
        else if (value == "ideal") a.crossbar.kind = CrossbarDist::Kind::IdealGaussian;
        else throw std::invalid_argument("bad value for crossbar_dist: '" + value + "' (lognormal|ideal)");
    } else if (key == "crossbar_median") a.crossbar.median_us = checked_num<double>(key, value);
    else if (key == "crossbar_sigma") a.crossbar.sigma_log = checked_num<double>(key, value);
    else if (key == "crossbar_max") a.crossbar.max_us = checked_num<double>(key, value);
    else if (key == "read_noise_stdv") cfg.lsh_noise.read_noise_stdv = checked_num<double>(key, value);
    else if (key == "short_window") a.detector.short_window = checked_num<std::uint32_t>(key, value);
    else if (key == "long_window") a.detector.long_window = checked_num<std::uint32_t>(key, value);
    else if (key == "t_threshold_short") a.detector.t_threshold_short = checked_num<double>(key, value);
    else if (key == "t_threshold_long") a.detector.t_threshold_long = checked_num<double>(key, value);
    else if (key == "min_event_len") a.detector.min_event_len = checked_num<std::uint32_t>(key, value);
    else if (key == "g_on") cfg.dev.g_on_target = checked_num<double>(key, value);
    else if (key == "g_off") cfg.dev.g_off_target = checked_num<double>(key, value);
    else if (key == "write_tolerance") cfg.dev.write_tolerance = checked_num<double>(key, value);
    else if (key == "variation_stdv") cfg.dev.variation_stdv = checked_num<double>(key, value);
    else if (key == "v_read") cfg.dev.v_read = checked_num<double>(key, value);
    else if (key == "outlier_rate") cfg.dev.outlier_rate = checked_num<double>(key, value);
    else if (key == "sample_rate") cfg.sim.sample_rate = checked_num<double>(key, value);
    else if (key == "bases_per_second") cfg.sim.bases_per_second = checked_num<double>(key, value);
    else if (key == "dwell_dist") {
        if (value == "geometric") cfg.sim.dwell.kind = DwellDist::Kind::Geometric;
        else if (value == "fixed") cfg.sim.dwell.kind = DwellDist::Kind::Fixed;
        else throw std::invalid_argument("bad value for dwell_dist: '" + value + "' (geometric|fixed)");
    } else if (key == "dwell_mean") cfg.sim.dwell.mean = checked_num<double>(key, value);
    else if (key == "dwell_min") cfg.sim.dwell.min_samples = checked_num<std::uint32_t>(key, value);
    else if (key == "current_noise_stdv") cfg.sim.current_noise_stdv = checked_num<double>(key, value);
    else if (key == "drift") cfg.sim.drift_pa_per_s = checked_num<double>(key, value);
    else if (key == "read_length") cfg.read_length = checked_num<std::uint32_t>(key, value);
    else if (key == "counts") {
        cfg.counts.clear();
        for (auto tok : split(value, ','))
            cfg.counts.push_back(checked_num<std::uint32_t>(key, std::string(tok)));
    } else if (key == "seed_sim") cfg.seed_sim = checked_num<std::uint64_t>(key, value);
    else if (key == "seed_crossbar") cfg.seed_crossbar = checked_num<std::uint64_t>(key, value);
    else if (key == "seed_cam") cfg.seed_cam = checked_num<std::uint64_t>(key, value);
    else if (key == "seed_noise") cfg.seed_noise = checked_num<std::uint64_t>(key, value);
    else if (key == "threads") cfg.threads = checked_num<std::uint32_t>(key, value);
    else if (key == "overlap_slack") cfg.overlap_slack = checked_num<std::uint32_t>(key, value);
    else if (key == "signal_format") {
        if (value != "text" && value != "binary")
            throw std::invalid_argument("bad value for signal_format: '" + value + "' (text|binary)");
        cfg.signal_format = value;
    } else if (key == "n_policy") {
        if (value != "reject" && value != "split")
            throw std::invalid_argument("bad value for n_policy: '" + value + "' (reject|split)");
        cfg.n_policy = value;
    } else if (key == "task") {
        if (value != "map" && value != "detect")
            throw std::invalid_argument("bad value for task: '" + value + "' (map|detect)");
        cfg.task = value;
    } else if (key == "sweep_cam") cfg.sweep_cam = value;
    else if (key == "sweep_votes") cfg.sweep_votes = value;
    else if (key == "sweep_samples") cfg.sweep_samples = value;
    else if (key == "reference") cfg.reference = value;
    else if (key == "model") cfg.model = value;
    else if (key == "reads") cfg.reads = value;
    else if (key == "index") cfg.index = value;
    else if (key == "out") cfg.out = value;
    else if (key == "truth") cfg.truth = value;
    else if (key == "results") cfg.results = value;
    else throw std::invalid_argument("unknown configuration key '" + key + "'");

    cfg.explicit_keys.insert(key);
}

// "key = value" lines, '#' comments, unknown keys rejected.
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty() || row[0] == '#') continue;
        std::size_t eq = row.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(path, line_no, "expected 'key = value'");
        std::string key{strip(row.substr(0, eq))};
        std::string value{strip(row.substr(eq + 1))};
        if (key.empty()) throw ParseError(path, line_no, "empty key");
        try {
            apply_config_key(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
}

// "lo:hi", "lo:hi:step", or comma-separated values.
inline std::vector<std::int32_t> parse_grid(const std::string& key, const std::string& spec) {
    std::vector<std::int32_t> out;
    if (spec.find(':') != std::string::npos) {
        auto parts = split(spec, ':');
        if (parts.size() < 2 || parts.size() > 3)
            throw std::invalid_argument("bad range for " + key + ": '" + spec + "'");
        std::int64_t lo, hi, step = 1;
        if (!parse_i64(parts[0], lo) || !parse_i64(parts[1], hi) ||
            (parts.size() == 3 && !parse_i64(parts[2], step)) || step <= 0 || hi < lo)
            throw std::invalid_argument("bad range for " + key + ": '" + spec + "'");
        for (std::int64_t v = lo; v <= hi; v += step) out.push_back(static_cast<std::int32_t>(v));
        return out;
    }
    for (auto tok : split(spec, ',')) {
        std::int64_t v;
        if (!parse_i64(strip(tok), v))
            throw std::invalid_argument("bad list for " + key + ": '" + spec + "'");
        out.push_back(static_cast<std::int32_t>(v));
    }
    if (out.empty()) throw std::invalid_argument("empty grid for " + key);
    return out;
}

}  // namespace memvote
