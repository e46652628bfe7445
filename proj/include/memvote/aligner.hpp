#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "memvote/cam_engine.hpp"
#include "memvote/event_detector.hpp"
#include "memvote/lsh_crossbar.hpp"
#include "memvote/pore_model.hpp"
#include "memvote/signal_sim.hpp"

namespace memvote {

// One analog seed: m consecutive filtered event levels.
using AnalogSeed = std::vector<double>;

struct AlignConfig {
    std::uint32_t m = 10;             // events per seed
    std::uint32_t hash_bits = 128;    // LSH width
    std::uint32_t bucket_size = 400;  // CAM rows per vote bucket
    std::int32_t cam_threshold = 7;   // mismatch tolerance
    std::uint32_t votes_min = 3;      // minimum winning votes
    std::uint32_t max_samples = 4000; // read truncation before detection
    double diff_threshold = 3.0;      // pA, event filter
    bool center_seeds = false;        // subtract each seed's mean before hashing
    bool normalize = false;           // method-of-moments event normalization
    SearchBackend backend = SearchBackend::Analog;
    CrossbarDist crossbar;
    DetectorParams detector;
};

// Stride-1 seed windows; fewer than m events yield no seeds.
inline std::vector<AnalogSeed> extract_seeds(const std::vector<double>& values, std::uint32_t m) {
    if (m == 0) throw std::invalid_argument("extract_seeds: m must be positive");
    std::vector<AnalogSeed> seeds;
    if (values.size() < m) return seeds;
    seeds.reserve(values.size() - m + 1);
    for (std::size_t i = 0; i + m <= values.size(); ++i)
        seeds.emplace_back(values.begin() + i, values.begin() + i + m);
    return seeds;
}

inline std::vector<AnalogSeed> extract_seeds(const EventVector& events, std::uint32_t m) {
    return extract_seeds(events.values, m);
}

namespace detail {

inline void center_seed(AnalogSeed& s) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= double(s.size());
    for (double& v : s) v -= mean;
}

}  // namespace detail

// Hashes seeds through the crossbar, honoring the centering switch. The
// reference path hashes noise-free; the read path may add per-access read
// noise.
inline std::vector<SeedHash> hash_seeds(const std::vector<AnalogSeed>& seeds, const CrossbarMatrix& cb,
                                        const AlignConfig& cfg, const LshNoiseParams& noise = {},
                                        Rng* rng = nullptr) {
    std::vector<SeedHash> out;
    out.reserve(seeds.size());
    for (const auto& s : seeds) {
        if (cfg.center_seeds) {
            AnalogSeed c = s;
            detail::center_seed(c);
            out.push_back(hash_seed(c, cb, noise, rng));
        } else {
            out.push_back(hash_seed(s, cb, noise, rng));
        }
    }
    return out;
}

struct SpeciesIndex {
    std::string id;
    std::uint32_t n_events = 0;   // expected events in the encoded reference
    std::uint32_t n_buckets = 0;
    CamArray cam;
};

struct ReferenceIndex {
    AlignConfig cfg;
    DeviceModel dev;
    std::uint64_t seed_crossbar = 0;
    std::uint64_t seed_cam = 0;
    int model_k = 0;
    double model_global_mean = 0.0;
    double model_global_stdv = 0.0;
    CrossbarMatrix crossbar;
    std::vector<SpeciesIndex> species;
};

// Builds the search structure: every reference seed position becomes one CAM
// row (stride 1, unfiltered expected events), hashed noise-free, bucketed by
// floor(row / bucket_size). Each species gets its own CAM array programmed
// from a derived RNG stream.
inline ReferenceIndex build_index(const std::vector<ReferenceSequence>& refs, const PoreModel& model,
                                  const AlignConfig& cfg, const DeviceModel& dev,
                                  std::uint64_t seed_crossbar, std::uint64_t seed_cam) {
    if (refs.empty()) throw std::invalid_argument("build_index: no references");
    if (cfg.bucket_size == 0) throw std::invalid_argument("build_index: bucket_size must be positive");

    ReferenceIndex index;
    index.cfg = cfg;
    index.dev = dev;
    index.seed_crossbar = seed_crossbar;
    index.seed_cam = seed_cam;
    index.model_k = model.k;
    index.model_global_mean = model.global_mean;
    index.model_global_stdv = model.global_stdv;
    index.crossbar = generate_crossbar(cfg.m, cfg.hash_bits, cfg.crossbar, seed_crossbar);

    for (std::size_t sp = 0; sp < refs.size(); ++sp) {
        ExpectedEventVector events = encode_reference(refs[sp], model);
        std::vector<AnalogSeed> seeds = extract_seeds(events.values, cfg.m);
        if (seeds.empty())
            throw std::invalid_argument("build_index: record '" + refs[sp].id + "' yields " +
                                        std::to_string(events.values.size()) +
                                        " events, fewer than m=" + std::to_string(cfg.m));
        std::vector<SeedHash> hashes = hash_seeds(seeds, index.crossbar, cfg);
        std::vector<std::uint32_t> buckets(hashes.size());
        for (std::size_t i = 0; i < hashes.size(); ++i)
            buckets[i] = static_cast<std::uint32_t>(i / cfg.bucket_size);

        SpeciesIndex si;
        si.id = refs[sp].id;
        si.n_events = static_cast<std::uint32_t>(events.values.size());
        si.n_buckets = buckets.back() + 1;
        si.cam = build_cam(hashes, std::move(buckets), dev, Rng::derive(seed_cam, sp).next());
        index.species.push_back(std::move(si));
    }
    return index;
}

// Votes per (species, bucket) histogrammed by mismatch-equivalent threshold:
// hist[b][c] counts matched rows whose smallest matching threshold is c, for
// c <= t_max. votes_at(T) is then a prefix sum, so one pass prices every
// threshold in a sweep and tally_votes(T) is its T-column by construction.
struct VoteHistogram {
    std::uint32_t t_max = 0;
    // species -> bucket -> (t_max+1) cells
    std::vector<std::vector<std::uint32_t>> cells;
    std::vector<std::uint32_t> n_buckets;

    std::uint32_t votes_at(std::size_t species, std::uint32_t bucket, std::int32_t threshold) const {
        if (threshold < 0) return 0;
        std::uint32_t t = std::min<std::uint32_t>(static_cast<std::uint32_t>(threshold), t_max);
        const std::uint32_t* row = cells[species].data() + std::size_t(bucket) * (t_max + 1);
        std::uint32_t v = 0;
        for (std::uint32_t c = 0; c <= t; ++c) v += row[c];
        return v;
    }
};

// One pass over every (seed, row) pair. The Hamming distance is always
// computed (two-word XOR/popcount); the analog backend re-reads the row
// current only when the per-row bound says a match below t_max is possible,
// and that exact readout goes through the same current_over_v kernel as
// search() and row_current_uA().
inline VoteHistogram vote_histogram(const ReferenceIndex& index, const std::vector<SeedHash>& hashes,
                                    SearchBackend backend, std::uint32_t t_max) {
    VoteHistogram h;
    h.t_max = t_max;
    h.cells.resize(index.species.size());
    h.n_buckets.resize(index.species.size());

    std::vector<float> qf;
    for (std::size_t sp = 0; sp < index.species.size(); ++sp) {
        const CamArray& cam = index.species[sp].cam;
        h.n_buckets[sp] = index.species[sp].n_buckets;
        h.cells[sp].assign(std::size_t(index.species[sp].n_buckets) * (t_max + 1), 0);
        std::uint32_t* cells = h.cells[sp].data();

        std::vector<std::uint32_t> cut;
        if (backend == SearchBackend::Analog) {
            cut.resize(cam.n_rows);
            for (std::uint32_t r = 0; r < cam.n_rows; ++r) cut[r] = cam.analog_cut(r, t_max);
        }

        const std::size_t words = cam.words_per_row();
        for (const SeedHash& q : hashes) {
            if (q.nbits != cam.bits) throw std::invalid_argument("vote_histogram: hash width mismatch");
            if (backend == SearchBackend::Analog) detail::query_floats(q, qf);
            const std::uint64_t* qw = q.words.data();
            if (words == 2) {
                // Hot path: 128-bit rows.
                const std::uint64_t q0 = qw[0], q1 = qw[1];
                const std::uint64_t* s = cam.stored.data();
                for (std::uint32_t r = 0; r < cam.n_rows; ++r, s += 2) {
                    std::uint32_t d = static_cast<std::uint32_t>(std::popcount(s[0] ^ q0) +
                                                                 std::popcount(s[1] ^ q1));
                    if (backend == SearchBackend::Digital) {
                        if (d <= t_max) ++cells[std::size_t(cam.row_bucket[r]) * (t_max + 1) + d];
                    } else if (d <= cut[r]) {
                        double x = cam.current_over_v(r, qf.data()) / cam.dev.g_on_target;
                        double dstar = std::floor(x - 0.5) + 1.0;
                        if (dstar < 0) dstar = 0;
                        if (dstar <= double(t_max))
                            ++cells[std::size_t(cam.row_bucket[r]) * (t_max + 1) +
                                    static_cast<std::uint32_t>(dstar)];
                    }
                }
            } else {
                for (std::uint32_t r = 0; r < cam.n_rows; ++r) {
                    std::uint32_t d = cam.hamming_row(r, q);
                    if (backend == SearchBackend::Digital) {
                        if (d <= t_max) ++cells[std::size_t(cam.row_bucket[r]) * (t_max + 1) + d];
                    } else if (d <= cut[r]) {
                        double x = cam.current_over_v(r, qf.data()) / cam.dev.g_on_target;
                        double dstar = std::floor(x - 0.5) + 1.0;
                        if (dstar < 0) dstar = 0;
                        if (dstar <= double(t_max))
                            ++cells[std::size_t(cam.row_bucket[r]) * (t_max + 1) +
                                    static_cast<std::uint32_t>(dstar)];
                    }
                }
            }
        }
    }
    return h;
}

// Votes per species and bucket at one threshold.
struct VoteTally {
    std::vector<std::vector<std::uint32_t>> votes;  // species -> bucket

    std::uint32_t species_total(std::size_t sp) const {
        std::uint32_t t = 0;
        for (std::uint32_t v : votes[sp]) t += v;
        return t;
    }
};

inline VoteTally tally_votes(const ReferenceIndex& index, const std::vector<SeedHash>& hashes,
                             std::int32_t cam_threshold, SearchBackend backend) {
    std::uint32_t t_max = cam_threshold < 0 ? 0 : static_cast<std::uint32_t>(cam_threshold);
    VoteHistogram h = vote_histogram(index, hashes, backend, t_max);
    VoteTally tally;
    tally.votes.resize(index.species.size());
    for (std::size_t sp = 0; sp < index.species.size(); ++sp) {
        tally.votes[sp].resize(h.n_buckets[sp]);
        for (std::uint32_t b = 0; b < h.n_buckets[sp]; ++b)
            tally.votes[sp][b] = h.votes_at(sp, b, cam_threshold);
    }
    return tally;
}

enum class Decision { Unmapped, Mapped, MappedBoundary };

inline const char* decision_name(Decision d) {
    switch (d) {
        case Decision::Mapped: return "mapped";
        case Decision::MappedBoundary: return "mapped_boundary";
        default: return "unmapped";
    }
}

struct MappingResult {
    Decision decision = Decision::Unmapped;
    std::int32_t species = -1;  // index into ReferenceIndex::species
    std::int32_t bucket = -1;   // winning bucket (lower one for a boundary pair)
    std::int32_t bucket2 = -1;  // second bucket of a boundary pair, else -1
    std::uint32_t v1 = 0, v2 = 0, v3 = 0;
    std::uint32_t n_events = 0;  // detected events after filtering
    std::uint32_t n_seeds = 0;
};

// The three highest-voted (species, bucket) cells, ties ordered by
// (species, bucket) ascending so results are stable.
struct TopVotes {
    std::uint32_t n = 0;  // populated entries
    std::uint32_t votes[3] = {0, 0, 0};
    std::uint32_t species[3] = {0, 0, 0};
    std::uint32_t bucket[3] = {0, 0, 0};
};

inline TopVotes gather_top(const VoteTally& tally) {
    TopVotes t;
    auto offer = [&](std::uint32_t v, std::uint32_t sp, std::uint32_t b) {
        if (v == 0) return;
        std::uint32_t pos = t.n < 3 ? t.n : 3;
        // Insertion by (votes desc, species asc, bucket asc); scan order
        // already yields ascending (species, bucket), so strict > suffices.
        while (pos > 0 && v > t.votes[pos - 1]) --pos;
        if (pos >= 3) return;
        for (std::uint32_t q = t.n < 3 ? t.n : 2; q > pos; --q) {
            t.votes[q] = t.votes[q - 1];
            t.species[q] = t.species[q - 1];
            t.bucket[q] = t.bucket[q - 1];
        }
        t.votes[pos] = v;
        t.species[pos] = sp;
        t.bucket[pos] = b;
        if (t.n < 3) ++t.n;
    };
    for (std::size_t sp = 0; sp < tally.votes.size(); ++sp)
        for (std::size_t b = 0; b < tally.votes[sp].size(); ++b)
            offer(tally.votes[sp][b], static_cast<std::uint32_t>(sp), static_cast<std::uint32_t>(b));
    return t;
}

// Vote decision rule. A clear winner needs at least twice the runner-up's
// votes; otherwise two adjacent buckets of one species may win jointly
// against the third-highest.
inline MappingResult decide(const TopVotes& top, std::uint32_t votes_min) {
    MappingResult r;
    r.v1 = top.votes[0];
    r.v2 = top.votes[1];
    r.v3 = top.votes[2];
    if (top.n == 0) return r;

    if (r.v1 >= 2 * r.v2 && r.v1 >= votes_min) {
        r.decision = Decision::Mapped;
        r.species = static_cast<std::int32_t>(top.species[0]);
        r.bucket = static_cast<std::int32_t>(top.bucket[0]);
        return r;
    }
    if (top.n > 1 && top.species[0] == top.species[1] &&
        (top.bucket[0] + 1 == top.bucket[1] || top.bucket[1] + 1 == top.bucket[0])) {
        std::uint32_t joint = r.v1 + r.v2;
        if (joint >= 2 * r.v3 && joint >= votes_min) {
            r.decision = Decision::MappedBoundary;
            r.species = static_cast<std::int32_t>(top.species[0]);
            r.bucket = static_cast<std::int32_t>(std::min(top.bucket[0], top.bucket[1]));
            r.bucket2 = r.bucket + 1;
            return r;
        }
    }
    return r;
}

inline MappingResult decide(const VoteTally& tally, std::uint32_t votes_min) {
    return decide(gather_top(tally), votes_min);
}

// Read pipeline knobs that may differ from the index defaults.
struct MapOptions {
    std::int32_t cam_threshold;
    std::uint32_t votes_min;
    std::uint32_t max_samples;
    double diff_threshold;
    SearchBackend backend;
    LshNoiseParams lsh_noise;

    explicit MapOptions(const AlignConfig& cfg)
        : cam_threshold(cfg.cam_threshold), votes_min(cfg.votes_min), max_samples(cfg.max_samples),
          diff_threshold(cfg.diff_threshold), backend(cfg.backend) {}
};

// Detected and filtered read events, up to seed extraction. Shared by the
// mapping, detection, abundance, and sweep paths so they cannot drift apart.
inline std::vector<SeedHash> read_seed_hashes(const ReferenceIndex& index, const RawSignal& signal,
                                              const MapOptions& opt, Rng* noise_rng,
                                              std::uint32_t* n_events_out = nullptr,
                                              std::uint32_t* n_seeds_out = nullptr) {
    const AlignConfig& cfg = index.cfg;
    if (n_events_out) *n_events_out = 0;
    if (n_seeds_out) *n_seeds_out = 0;

    RawSignal clipped;
    const RawSignal* sig = &signal;
    if (opt.max_samples && signal.samples.size() > opt.max_samples) {
        clipped.read_id = signal.read_id;
        clipped.sample_rate = signal.sample_rate;
        clipped.samples.assign(signal.samples.begin(), signal.samples.begin() + opt.max_samples);
        sig = &clipped;
    }
    if (sig->samples.size() <= 2 * std::size_t(cfg.detector.long_window)) return {};

    EventVector events = detect_events(*sig, cfg.detector);
    EventVector filtered = filter_events(events, opt.diff_threshold);
    if (n_events_out) *n_events_out = static_cast<std::uint32_t>(filtered.size());
    if (filtered.values.empty()) return {};
    if (cfg.normalize) {
        if (!(index.model_global_stdv > 0)) return {};
        PoreModel stats;
        stats.global_mean = index.model_global_mean;
        stats.global_stdv = index.model_global_stdv;
        filtered = normalize_events(filtered, stats);
    }
    std::vector<AnalogSeed> seeds = extract_seeds(filtered.values, cfg.m);
    if (n_seeds_out) *n_seeds_out = static_cast<std::uint32_t>(seeds.size());
    if (seeds.empty()) return {};
    return hash_seeds(seeds, index.crossbar, cfg, opt.lsh_noise, noise_rng);
}

// Full per-read mapping: truncate, detect, filter, hash, vote, decide. A read
// too short or too featureless to produce seeds is Unmapped, never an error.
inline MappingResult map_read(const ReferenceIndex& index, const RawSignal& signal,
                              const MapOptions& opt, Rng* noise_rng = nullptr) {
    MappingResult r;
    std::vector<SeedHash> hashes =
        read_seed_hashes(index, signal, opt, noise_rng, &r.n_events, &r.n_seeds);
    if (hashes.empty()) return r;
    VoteTally tally = tally_votes(index, hashes, opt.cam_threshold, opt.backend);
    MappingResult decided = decide(tally, opt.votes_min);
    decided.n_events = r.n_events;
    decided.n_seeds = r.n_seeds;
    return decided;
}

struct DetectResult {
    std::uint32_t votes = 0;
    bool detected = false;
    std::uint32_t n_seeds = 0;
};

// Presence call against a single-reference index: total votes for the
// reference strictly above votes_min.
inline DetectResult classify_detection(const ReferenceIndex& index, const RawSignal& signal,
                                       const MapOptions& opt, Rng* noise_rng = nullptr) {
    DetectResult res;
    std::uint32_t n_events = 0;
    std::vector<SeedHash> hashes = read_seed_hashes(index, signal, opt, noise_rng, &n_events, &res.n_seeds);
    if (hashes.empty()) return res;
    VoteTally tally = tally_votes(index, hashes, opt.cam_threshold, opt.backend);
    res.votes = tally.species_total(0);
    res.detected = res.votes > opt.votes_min;
    return res;
}

// Species call for one read: argmax of total votes, ties (including all
// zero) unclassified (-1).
inline std::int32_t assign_species(const ReferenceIndex& index, const VoteTally& tally) {
    std::int32_t best = -1;
    std::uint32_t best_votes = 0;
    bool tie = false;
    for (std::size_t sp = 0; sp < index.species.size(); ++sp) {
        std::uint32_t v = tally.species_total(sp);
        if (v > best_votes) {
            best_votes = v;
            best = static_cast<std::int32_t>(sp);
            tie = false;
        } else if (v == best_votes && v > 0) {
            tie = true;
        }
    }
    return (tie || best_votes == 0) ? -1 : best;
}

// Detection / classification quality. Division by zero is defined as 0.
struct Metrics {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double recall = 0.0, precision = 0.0, f1 = 0.0;

    static Metrics from_counts(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp) {
        Metrics m;
        m.tp = tp;
        m.fn = fn;
        m.fp = fp;
        m.recall = (tp + fn) ? double(tp) / double(tp + fn) : 0.0;
        m.precision = (tp + fp) ? double(tp) / double(tp + fp) : 0.0;
        m.f1 = (m.recall + m.precision) > 0 ? 2.0 * m.recall * m.precision / (m.recall + m.precision)
                                            : 0.0;
        return m;
    }
};

struct ReadTruthMeta {
    std::string species;
    std::uint32_t start = 0;   // base offset
    std::uint32_t length = 0;  // bases
};

// One emitted mapping row, self-contained for scoring (species by id).
struct ScoredMapping {
    std::string read_id;
    Decision decision = Decision::Unmapped;
    std::string species;        // empty when unmapped
    std::int32_t bucket = -1;
    std::int32_t bucket2 = -1;  // -1 unless a boundary pair
};

// Everything scoring needs to know about how the index was built.
struct ScoreParams {
    int k = 6;
    std::uint32_t m = 10;
    std::uint32_t bucket_size = 400;
    std::uint32_t overlap_slack = 1;
    std::vector<std::string> indexed_species;

    bool indexed(const std::string& sp) const {
        for (const auto& s : indexed_species)
            if (s == sp) return true;
        return false;
    }
};

// Per-read mapping outcome against truth.
enum class MapOutcome : std::uint8_t {
    Ignored,       // unplaced foreign read
    TruePositive,  // correct species, bucket within slack
    FalsePositive, // placed foreign read
    FalseNegative, // indexed read left unmapped
    WrongPlace,    // indexed read placed wrong: counts FP and FN
};

// An indexed read is TP when the called species matches and a called bucket
// lies within overlap_slack of the bucket span its seed rows truly cover; a
// wrong placement costs both FP and FN; Unmapped costs FN. A read whose
// species is not in the index contributes FP when placed and nothing
// otherwise.
inline MapOutcome score_mapping_one(const ScoreParams& p, const ScoredMapping& sm,
                                    const ReadTruthMeta& t) {
    bool in_index = p.indexed(t.species);
    bool placed = sm.decision != Decision::Unmapped;
    if (!in_index) return placed ? MapOutcome::FalsePositive : MapOutcome::Ignored;
    if (!placed) return MapOutcome::FalseNegative;

    std::uint32_t n_events = t.length >= std::uint32_t(p.k) ? t.length - std::uint32_t(p.k) + 1 : 0;
    std::uint32_t row_lo = t.start;
    std::uint32_t row_hi = t.start + (n_events > p.m ? n_events - p.m : 0);
    std::int64_t lo = std::int64_t(row_lo / p.bucket_size) - p.overlap_slack;
    std::int64_t hi = std::int64_t(row_hi / p.bucket_size) + p.overlap_slack;

    bool species_ok = sm.species == t.species;
    bool bucket_ok = (sm.bucket >= lo && sm.bucket <= hi) ||
                     (sm.bucket2 >= 0 && sm.bucket2 >= lo && sm.bucket2 <= hi);
    return (species_ok && bucket_ok) ? MapOutcome::TruePositive : MapOutcome::WrongPlace;
}

inline void add_outcome(MapOutcome o, std::uint64_t& tp, std::uint64_t& fp, std::uint64_t& fn) {
    switch (o) {
        case MapOutcome::TruePositive: ++tp; break;
        case MapOutcome::FalsePositive: ++fp; break;
        case MapOutcome::FalseNegative: ++fn; break;
        case MapOutcome::WrongPlace: ++fp; ++fn; break;
        case MapOutcome::Ignored: break;
    }
}

inline Metrics score_mapping(const ScoreParams& p, const std::vector<ScoredMapping>& results,
                             const std::map<std::string, ReadTruthMeta>& truth) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& sm : results) {
        auto it = truth.find(sm.read_id);
        if (it == truth.end())
            throw std::invalid_argument("score_mapping: no truth for read " + sm.read_id);
        add_outcome(score_mapping_one(p, sm, it->second), tp, fp, fn);
    }
    return Metrics::from_counts(tp, fn, fp);
}

// Detection scoring: reads of the target species should be detected, all
// others should not.
struct ScoredDetection {
    std::string read_id;
    bool detected = false;
};

inline Metrics score_detection(const std::string& target_species,
                               const std::vector<ScoredDetection>& results,
                               const std::map<std::string, ReadTruthMeta>& truth) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& r : results) {
        auto it = truth.find(r.read_id);
        if (it == truth.end())
            throw std::invalid_argument("score_detection: no truth for read " + r.read_id);
        bool positive = it->second.species == target_species;
        if (positive && r.detected) ++tp;
        else if (positive) ++fn;
        else if (r.detected) ++fp;
    }
    return Metrics::from_counts(tp, fn, fp);
}

// Community profile over per-read species calls. Abundance fractions are
// over classified reads; accuracy is over reads whose true species is
// indexed (an unclassified read counts as wrong).
struct AbundanceStats {
    std::vector<std::string> species;            // index order
    std::vector<std::uint64_t> read_counts;      // assigned reads per species
    std::uint64_t unclassified = 0;
    std::vector<double> abundance;               // read_counts / classified
    double accuracy = 0.0;
    std::uint64_t n_truth_reads = 0;
    // confusion[truth][called], truth rows: indexed species then "foreign",
    // called columns: indexed species then "unclassified"
    std::vector<std::vector<std::uint64_t>> confusion;
};

struct ScoredAssignment {
    std::string read_id;
    std::int32_t species = -1;  // index into the species list, -1 unclassified
};

inline AbundanceStats summarize_abundance(const std::vector<std::string>& species_ids,
                                          const std::vector<ScoredAssignment>& results,
                                          const std::map<std::string, ReadTruthMeta>* truth) {
    AbundanceStats st;
    st.species = species_ids;
    st.read_counts.assign(species_ids.size(), 0);
    std::uint64_t classified = 0;
    for (const auto& r : results) {
        if (r.species >= 0 && std::size_t(r.species) < species_ids.size()) {
            ++st.read_counts[std::size_t(r.species)];
            ++classified;
        } else {
            ++st.unclassified;
        }
    }
    st.abundance.assign(species_ids.size(), 0.0);
    if (classified)
        for (std::size_t i = 0; i < species_ids.size(); ++i)
            st.abundance[i] = double(st.read_counts[i]) / double(classified);

    if (truth) {
        st.confusion.assign(species_ids.size() + 1,
                            std::vector<std::uint64_t>(species_ids.size() + 1, 0));
        std::uint64_t correct = 0;
        for (const auto& r : results) {
            auto it = truth->find(r.read_id);
            if (it == truth->end())
                throw std::invalid_argument("summarize_abundance: no truth for read " + r.read_id);
            std::size_t truth_row = species_ids.size();  // foreign
            for (std::size_t i = 0; i < species_ids.size(); ++i)
                if (species_ids[i] == it->second.species) truth_row = i;
            std::size_t called_col =
                r.species >= 0 && std::size_t(r.species) < species_ids.size()
                    ? std::size_t(r.species)
                    : species_ids.size();
            ++st.confusion[truth_row][called_col];
            if (truth_row < species_ids.size()) {
                ++st.n_truth_reads;
                if (called_col == truth_row) ++correct;
            }
        }
        st.accuracy = st.n_truth_reads ? double(correct) / double(st.n_truth_reads) : 0.0;
    }
    return st;
}

}  // namespace memvote
