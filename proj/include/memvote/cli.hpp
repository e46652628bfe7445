#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "memvote/aligner.hpp"
#include "memvote/common.hpp"
#include "memvote/config.hpp"
#include "memvote/index_io.hpp"
#include "memvote/signal_io.hpp"
#include "memvote/signal_sim.hpp"

// Command line front end. Exit codes: 0 success, 2 input or usage error,
// 3 format version mismatch, 4 internal error.

namespace memvote {

// Bad invocation (unknown flag, missing required argument, bad config).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace cli {

inline constexpr const char* kUsage =
    "usage: memvote <subcommand> [--key value ...]\n"
    "\n"
    "subcommands:\n"
    "  simulate   synthesize raw signals and a truth manifest from a reference\n"
    "  index      build the hashing crossbar + CAM index of references\n"
    "  map        map raw reads to (species, bucket) positions\n"
    "  detect     presence calls against a single-reference index\n"
    "  abundance  per-read species calls and community profile\n"
    "  sweep      grid search over cam_threshold x votes_min (x max_samples)\n"
    "  eval       score a results file against a truth manifest\n"
    "\n"
    "common flags: --config FILE, --reference F, --model F, --reads F, --index F,\n"
    "  --out PREFIX, --truth F, --results F, --seed-sim N, --seed-crossbar N,\n"
    "  --seed-cam N, --seed-noise N, --backend analog|digital, --cam-threshold N,\n"
    "  --votes-min N, --max-samples N, --threads N\n"
    "Every configuration key is also a flag; flags win over --config values.\n"
    "Run 'memvote keys' to list all keys.\n";

inline std::string flag_to_key(std::string flag) {
    for (char& c : flag)
        if (c == '-') c = '_';
    return flag;
}

// Parses argv into a RunConfig. --config files apply first, flags second.
inline RunConfig parse_args(const std::vector<std::string>& args, std::size_t first) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = first; i < args.size(); ++i) {
        const std::string& tok = args[i];
        if (tok.size() < 3 || tok[0] != '-' || tok[1] != '-')
            throw UsageError("expected --key value, got '" + tok + "'");
        std::string key = tok.substr(2);
        std::string value;
        std::size_t eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= args.size()) throw UsageError("flag --" + key + " needs a value");
            value = args[++i];
        }
        pairs.emplace_back(flag_to_key(key), value);
    }

    RunConfig cfg;
    try {
        for (const auto& [k, v] : pairs)
            if (k == "config") load_config_file(cfg, v);
        for (const auto& [k, v] : pairs)
            if (k != "config") apply_config_key(cfg, k, v);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

inline void require(const RunConfig& cfg, const std::string& key, const std::string& value) {
    if (value.empty()) throw UsageError("missing required flag --" + key + " for this subcommand");
    (void)cfg;
}

// Every summary and table starts with the tool line and the four RNG seeds.
inline void print_header(std::ostream& os, const char* sub, std::uint64_t seed_sim,
                         std::uint64_t seed_crossbar, std::uint64_t seed_cam,
                         std::uint64_t seed_noise) {
    os << "# memvote " << sub << " v1\n";
    os << "# seeds\tsim=" << seed_sim << "\tcrossbar=" << seed_crossbar << "\tcam=" << seed_cam
       << "\tnoise=" << seed_noise << "\n";
}

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline void print_metrics(std::ostream& os, const Metrics& m) {
    os << "tp\t" << m.tp << "\nfp\t" << m.fp << "\nfn\t" << m.fn << "\n";
    os << "recall\t" << fmt6(m.recall) << "\nprecision\t" << fmt6(m.precision) << "\nf1\t"
       << fmt6(m.f1) << "\n";
}

// Deterministic indexed parallelism; fn(i) must only touch slot i.
template <typename F>
inline void parallel_for(std::size_t n, std::uint32_t threads, F&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    std::uint32_t nt = std::min<std::uint32_t>(threads, static_cast<std::uint32_t>(n));
    pool.reserve(nt);
    for (std::uint32_t t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline std::vector<RawSignal> read_signals_any(const std::string& path) {
    if (std::filesystem::exists(path + ".hdr")) return read_signals_binary(path);
    return read_signals_text(path);
}

inline std::map<std::string, ReadTruthMeta> truth_from_manifest(const std::string& path) {
    std::map<std::string, ReadTruthMeta> truth;
    for (const auto& row : read_manifest(path))
        truth[row.read_id] = ReadTruthMeta{row.species, row.start, row.length};
    return truth;
}

// Read-path options: index snapshot defaults, explicit flags override.
inline MapOptions make_map_options(const ReferenceIndex& idx, const RunConfig& cfg) {
    MapOptions opt(idx.cfg);
    if (cfg.is_set("cam_threshold")) opt.cam_threshold = cfg.align.cam_threshold;
    if (cfg.is_set("votes_min")) opt.votes_min = cfg.align.votes_min;
    if (cfg.is_set("max_samples")) opt.max_samples = cfg.align.max_samples;
    if (cfg.is_set("diff_threshold")) opt.diff_threshold = cfg.align.diff_threshold;
    if (cfg.is_set("backend")) opt.backend = cfg.align.backend;
    opt.lsh_noise = cfg.lsh_noise;
    return opt;
}

inline ScoreParams make_score_params(const ReferenceIndex& idx, std::uint32_t slack) {
    ScoreParams p;
    p.k = idx.model_k;
    p.m = idx.cfg.m;
    p.bucket_size = idx.cfg.bucket_size;
    p.overlap_slack = slack;
    for (const auto& sp : idx.species) p.indexed_species.push_back(sp.id);
    return p;
}

// ---------------------------------------------------------------- simulate

inline int cmd_simulate(const RunConfig& cfg) {
    require(cfg, "reference", cfg.reference);
    require(cfg, "model", cfg.model);
    require(cfg, "out", cfg.out);

    PoreModel model = load_pore_model(cfg.model);
    AmbigPolicy policy = cfg.n_policy == "split" ? AmbigPolicy::Split : AmbigPolicy::Reject;
    std::vector<ReferenceSequence> refs = parse_fasta(cfg.reference, policy);

    std::vector<std::uint32_t> counts = cfg.counts;
    if (counts.empty()) counts.assign(refs.size(), 1);
    if (counts.size() == 1 && refs.size() > 1) counts.assign(refs.size(), counts[0]);
    if (counts.size() != refs.size())
        throw UsageError("--counts needs one value, or one per FASTA record (" +
                         std::to_string(refs.size()) + " records)");

    std::vector<CommunitySpec> specs;
    for (std::size_t i = 0; i < refs.size(); ++i)
        specs.push_back({refs[i], counts[i], cfg.read_length});

    SimParams sim = cfg.sim;
    sim.rng_seed = cfg.seed_sim;
    SimDataset ds = simulate_community(specs, model, sim);

    std::string signals_path;
    if (cfg.signal_format == "binary") {
        signals_path = cfg.out + ".sigbin";
        write_signals_binary(signals_path, ds.reads);
    } else {
        signals_path = cfg.out + ".signals.tsv";
        write_signals_text(signals_path, ds.reads);
    }
    std::string manifest_path = cfg.out + ".manifest.tsv";
    write_manifest(manifest_path, ds.manifest);

    print_header(std::cout, "simulate", cfg.seed_sim, cfg.seed_crossbar, cfg.seed_cam,
                 cfg.seed_noise);
    std::uint64_t total_samples = 0;
    for (const auto& r : ds.reads) total_samples += r.samples.size();
    std::cout << "records\t" << refs.size() << "\n";
    for (std::size_t i = 0; i < refs.size(); ++i)
        std::cout << "reads\t" << refs[i].id << "\t" << counts[i] << "\n";
    std::cout << "total_reads\t" << ds.reads.size() << "\n";
    std::cout << "total_samples\t" << total_samples << "\n";
    std::cout << "signals\t" << signals_path << "\n";
    std::cout << "manifest\t" << manifest_path << "\n";
    return 0;
}

// ------------------------------------------------------------------- index

inline int cmd_index(const RunConfig& cfg) {
    require(cfg, "reference", cfg.reference);
    require(cfg, "model", cfg.model);
    require(cfg, "out", cfg.out);

    PoreModel model = load_pore_model(cfg.model);
    AmbigPolicy policy = cfg.n_policy == "split" ? AmbigPolicy::Split : AmbigPolicy::Reject;
    std::vector<ReferenceSequence> refs = parse_fasta(cfg.reference, policy);

    ReferenceIndex idx =
        build_index(refs, model, cfg.align, cfg.dev, cfg.seed_crossbar, cfg.seed_cam);
    save_index(cfg.out, idx);

    print_header(std::cout, "index", cfg.seed_sim, cfg.seed_crossbar, cfg.seed_cam, cfg.seed_noise);
    std::cout << "crossbar\tm=" << idx.crossbar.m << "\tbits=" << idx.crossbar.bits << "\n";
    std::cout << "backend\t" << backend_name(idx.cfg.backend) << "\n";
    for (const auto& sp : idx.species)
        std::cout << "species\t" << sp.id << "\tevents=" << sp.n_events << "\trows="
                  << sp.cam.n_rows << "\tbuckets=" << sp.n_buckets << "\n";
    std::cout << "index\t" << cfg.out << "\n";
    return 0;
}

// --------------------------------------------------------------------- map

inline int cmd_map(const RunConfig& cfg) {
    require(cfg, "index", cfg.index);
    require(cfg, "reads", cfg.reads);
    require(cfg, "out", cfg.out);

    ReferenceIndex idx = load_index(cfg.index);
    std::vector<RawSignal> reads = read_signals_any(cfg.reads);
    MapOptions opt = make_map_options(idx, cfg);

    std::vector<MappingResult> results(reads.size());
    parallel_for(reads.size(), cfg.threads, [&](std::size_t i) {
        Rng rng = Rng::derive(cfg.seed_noise, i);
        results[i] = map_read(idx, reads[i], opt, &rng);
    });

    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw IoError("cannot write " + cfg.out);
    print_header(out, "map", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam, cfg.seed_noise);
    out << "#meta\ttask=map\tk=" << idx.model_k << "\tm=" << idx.cfg.m << "\tbucket_size="
        << idx.cfg.bucket_size << "\tslack=" << cfg.overlap_slack << "\tcam_threshold="
        << opt.cam_threshold << "\tvotes_min=" << opt.votes_min << "\tmax_samples="
        << opt.max_samples << "\tbackend=" << backend_name(opt.backend) << "\n";
    out << "#species";
    for (const auto& sp : idx.species) out << '\t' << sp.id;
    out << "\n#read_id\tdecision\tspecies\tbucket\tbucket2\tv1\tv2\tv3\tn_events\tn_seeds\n";
    std::uint64_t n_mapped = 0, n_boundary = 0, n_unmapped = 0;
    for (std::size_t i = 0; i < reads.size(); ++i) {
        const MappingResult& r = results[i];
        const char* sp_id = r.species >= 0 ? idx.species[std::size_t(r.species)].id.c_str() : ".";
        out << reads[i].read_id << '\t' << decision_name(r.decision) << '\t' << sp_id << '\t'
            << r.bucket << '\t' << r.bucket2 << '\t' << r.v1 << '\t' << r.v2 << '\t' << r.v3
            << '\t' << r.n_events << '\t' << r.n_seeds << '\n';
        if (r.decision == Decision::Mapped) ++n_mapped;
        else if (r.decision == Decision::MappedBoundary) ++n_boundary;
        else ++n_unmapped;
    }
    if (!out) throw IoError("short write to " + cfg.out);
    out.close();

    print_header(std::cout, "map", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam, cfg.seed_noise);
    std::cout << "reads\t" << reads.size() << "\nmapped\t" << n_mapped << "\nmapped_boundary\t"
              << n_boundary << "\nunmapped\t" << n_unmapped << "\n";
    std::cout << "results\t" << cfg.out << "\n";

    if (!cfg.truth.empty()) {
        auto truth = truth_from_manifest(cfg.truth);
        std::vector<ScoredMapping> scored;
        scored.reserve(reads.size());
        for (std::size_t i = 0; i < reads.size(); ++i) {
            const MappingResult& r = results[i];
            scored.push_back({reads[i].read_id, r.decision,
                              r.species >= 0 ? idx.species[std::size_t(r.species)].id : "",
                              r.bucket, r.bucket2});
        }
        Metrics m = score_mapping(make_score_params(idx, cfg.overlap_slack), scored, truth);
        print_metrics(std::cout, m);
    }
    return 0;
}

// ------------------------------------------------------------------ detect

inline int cmd_detect(const RunConfig& cfg) {
    require(cfg, "index", cfg.index);
    require(cfg, "reads", cfg.reads);
    require(cfg, "out", cfg.out);

    ReferenceIndex idx = load_index(cfg.index);
    if (idx.species.size() != 1)
        throw UsageError("detect needs a single-reference index (this one has " +
                         std::to_string(idx.species.size()) + " species)");
    std::vector<RawSignal> reads = read_signals_any(cfg.reads);
    MapOptions opt = make_map_options(idx, cfg);
    if (!cfg.is_set("cam_threshold")) opt.cam_threshold = 16;  // presence calls favor a looser match

    std::vector<DetectResult> results(reads.size());
    parallel_for(reads.size(), cfg.threads, [&](std::size_t i) {
        Rng rng = Rng::derive(cfg.seed_noise, i);
        results[i] = classify_detection(idx, reads[i], opt, &rng);
    });

    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw IoError("cannot write " + cfg.out);
    print_header(out, "detect", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam, cfg.seed_noise);
    out << "#meta\ttask=detect\ttarget=" << idx.species[0].id << "\tcam_threshold="
        << opt.cam_threshold << "\tvotes_min=" << opt.votes_min << "\tmax_samples="
        << opt.max_samples << "\tbackend=" << backend_name(opt.backend) << "\n";
    out << "#read_id\tvotes\tdetected\tn_seeds\n";
    std::uint64_t n_detected = 0;
    for (std::size_t i = 0; i < reads.size(); ++i) {
        out << reads[i].read_id << '\t' << results[i].votes << '\t' << (results[i].detected ? 1 : 0)
            << '\t' << results[i].n_seeds << '\n';
        if (results[i].detected) ++n_detected;
    }
    if (!out) throw IoError("short write to " + cfg.out);
    out.close();

    print_header(std::cout, "detect", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam,
                 cfg.seed_noise);
    std::cout << "reads\t" << reads.size() << "\ndetected\t" << n_detected << "\n";
    std::cout << "results\t" << cfg.out << "\n";

    if (!cfg.truth.empty()) {
        auto truth = truth_from_manifest(cfg.truth);
        std::vector<ScoredDetection> scored;
        scored.reserve(reads.size());
        for (std::size_t i = 0; i < reads.size(); ++i)
            scored.push_back({reads[i].read_id, results[i].detected});
        Metrics m = score_detection(idx.species[0].id, scored, truth);
        print_metrics(std::cout, m);
    }
    return 0;
}

// --------------------------------------------------------------- abundance

inline int cmd_abundance(const RunConfig& cfg) {
    require(cfg, "index", cfg.index);
    require(cfg, "reads", cfg.reads);
    require(cfg, "out", cfg.out);

    ReferenceIndex idx = load_index(cfg.index);
    std::vector<RawSignal> reads = read_signals_any(cfg.reads);
    MapOptions opt = make_map_options(idx, cfg);

    struct Row {
        std::int32_t species = -1;
        std::uint32_t votes = 0;
    };
    std::vector<Row> rows(reads.size());
    parallel_for(reads.size(), cfg.threads, [&](std::size_t i) {
        Rng rng = Rng::derive(cfg.seed_noise, i);
        std::vector<SeedHash> hashes = read_seed_hashes(idx, reads[i], opt, &rng);
        if (hashes.empty()) return;
        VoteTally tally = tally_votes(idx, hashes, opt.cam_threshold, opt.backend);
        rows[i].species = assign_species(idx, tally);
        if (rows[i].species >= 0) rows[i].votes = tally.species_total(std::size_t(rows[i].species));
    });

    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw IoError("cannot write " + cfg.out);
    print_header(out, "abundance", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam, cfg.seed_noise);
    out << "#meta\ttask=abundance\tcam_threshold=" << opt.cam_threshold << "\tvotes_min="
        << opt.votes_min << "\tmax_samples=" << opt.max_samples << "\tbackend="
        << backend_name(opt.backend) << "\n";
    out << "#species";
    for (const auto& sp : idx.species) out << '\t' << sp.id;
    out << "\n#read_id\tcalled\tvotes\n";
    std::vector<ScoredAssignment> assignments;
    assignments.reserve(reads.size());
    for (std::size_t i = 0; i < reads.size(); ++i) {
        const char* sp_id = rows[i].species >= 0 ? idx.species[std::size_t(rows[i].species)].id.c_str() : ".";
        out << reads[i].read_id << '\t' << sp_id << '\t' << rows[i].votes << '\n';
        assignments.push_back({reads[i].read_id, rows[i].species});
    }
    if (!out) throw IoError("short write to " + cfg.out);
    out.close();

    std::map<std::string, ReadTruthMeta> truth;
    if (!cfg.truth.empty()) truth = truth_from_manifest(cfg.truth);
    std::vector<std::string> ids;
    for (const auto& sp : idx.species) ids.push_back(sp.id);
    AbundanceStats st = summarize_abundance(ids, assignments, cfg.truth.empty() ? nullptr : &truth);

    print_header(std::cout, "abundance", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam,
                 cfg.seed_noise);
    std::cout << "reads\t" << reads.size() << "\nunclassified\t" << st.unclassified << "\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        std::cout << "abundance\t" << ids[i] << "\t" << st.read_counts[i] << "\t"
                  << fmt6(st.abundance[i]) << "\n";
    if (!cfg.truth.empty()) {
        std::cout << "accuracy\t" << fmt6(st.accuracy) << "\n";
        std::cout << "#confusion\ttruth";
        for (const auto& id : ids) std::cout << '\t' << id;
        std::cout << "\tunclassified\n";
        for (std::size_t r = 0; r <= ids.size(); ++r) {
            std::cout << "confusion\t" << (r < ids.size() ? ids[r] : "foreign");
            for (std::size_t c = 0; c <= ids.size(); ++c) std::cout << '\t' << st.confusion[r][c];
            std::cout << "\n";
        }
    }
    std::cout << "results\t" << cfg.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- sweep

inline int cmd_sweep(const RunConfig& cfg) {
    require(cfg, "index", cfg.index);
    require(cfg, "reads", cfg.reads);
    require(cfg, "truth", cfg.truth);
    require(cfg, "out", cfg.out);

    ReferenceIndex idx = load_index(cfg.index);
    std::vector<RawSignal> reads = read_signals_any(cfg.reads);
    auto truth = truth_from_manifest(cfg.truth);
    MapOptions base_opt = make_map_options(idx, cfg);

    const bool detect_task = cfg.task == "detect";
    if (detect_task && idx.species.size() != 1)
        throw UsageError("sweep --task detect needs a single-reference index");

    std::vector<std::int32_t> cams = parse_grid("sweep_cam", cfg.sweep_cam);
    std::vector<std::int32_t> votes = parse_grid("sweep_votes", cfg.sweep_votes);
    std::vector<std::int32_t> samples;
    if (cfg.sweep_samples.empty()) samples = {std::int32_t(base_opt.max_samples)};
    else samples = parse_grid("sweep_samples", cfg.sweep_samples);
    for (std::int32_t c : cams)
        if (c < 0 || std::uint32_t(c) > idx.cfg.hash_bits)
            throw UsageError("sweep_cam value " + std::to_string(c) + " outside [0, hash_bits]");
    std::uint32_t t_max = std::uint32_t(*std::max_element(cams.begin(), cams.end()));

    ScoreParams sp = make_score_params(idx, cfg.overlap_slack);
    const std::size_t grid = samples.size() * cams.size() * votes.size();
    // outcome per read per grid point, MapOutcome or detect code
    std::vector<std::uint8_t> outcome(reads.size() * grid, 0);

    parallel_for(reads.size(), cfg.threads, [&](std::size_t i) {
        auto it = truth.find(reads[i].read_id);
        if (it == truth.end())
            throw std::invalid_argument("sweep: no truth for read " + reads[i].read_id);
        const ReadTruthMeta& t = it->second;
        std::uint8_t* slot = outcome.data() + i * grid;
        for (std::size_t si = 0; si < samples.size(); ++si) {
            MapOptions opt = base_opt;
            opt.max_samples = std::uint32_t(samples[si]);
            Rng rng = Rng::derive(cfg.seed_noise, i);
            std::vector<SeedHash> hashes = read_seed_hashes(idx, reads[i], opt, &rng);
            VoteHistogram hist;
            if (!hashes.empty()) hist = vote_histogram(idx, hashes, opt.backend, t_max);
            for (std::size_t ci = 0; ci < cams.size(); ++ci) {
                if (detect_task) {
                    std::uint32_t total = 0;
                    if (!hashes.empty())
                        for (std::uint32_t b = 0; b < hist.n_buckets[0]; ++b)
                            total += hist.votes_at(0, b, cams[ci]);
                    bool positive = t.species == idx.species[0].id;
                    for (std::size_t vi = 0; vi < votes.size(); ++vi) {
                        bool det = total > std::uint32_t(std::max<std::int32_t>(votes[vi], 0));
                        std::uint8_t code = positive ? (det ? 1 : 3) : (det ? 2 : 0);
                        slot[(si * cams.size() + ci) * votes.size() + vi] = code;
                    }
                } else {
                    VoteTally tally;
                    TopVotes top;
                    if (!hashes.empty()) {
                        tally.votes.resize(idx.species.size());
                        for (std::size_t s = 0; s < idx.species.size(); ++s) {
                            tally.votes[s].resize(hist.n_buckets[s]);
                            for (std::uint32_t b = 0; b < hist.n_buckets[s]; ++b)
                                tally.votes[s][b] = hist.votes_at(s, b, cams[ci]);
                        }
                        top = gather_top(tally);
                    }
                    for (std::size_t vi = 0; vi < votes.size(); ++vi) {
                        MappingResult r = decide(top, std::uint32_t(std::max<std::int32_t>(votes[vi], 0)));
                        ScoredMapping smr{reads[i].read_id, r.decision,
                                          r.species >= 0 ? idx.species[std::size_t(r.species)].id : "",
                                          r.bucket, r.bucket2};
                        slot[(si * cams.size() + ci) * votes.size() + vi] =
                            static_cast<std::uint8_t>(score_mapping_one(sp, smr, t));
                    }
                }
            }
        }
    });

    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw IoError("cannot write " + cfg.out);
    print_header(out, "sweep", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam, cfg.seed_noise);
    out << "#meta\ttask=" << cfg.task << "\tslack=" << cfg.overlap_slack << "\tbackend="
        << backend_name(base_opt.backend) << "\n";
    out << "#max_samples\tcam_threshold\tvotes_min\ttp\tfp\tfn\trecall\tprecision\tf1\n";

    double best_f1 = -1.0;
    std::int32_t best_s = 0, best_c = 0, best_v = 0;
    for (std::size_t si = 0; si < samples.size(); ++si)
        for (std::size_t ci = 0; ci < cams.size(); ++ci)
            for (std::size_t vi = 0; vi < votes.size(); ++vi) {
                std::uint64_t tp = 0, fp = 0, fn = 0;
                const std::size_t cell = (si * cams.size() + ci) * votes.size() + vi;
                for (std::size_t i = 0; i < reads.size(); ++i) {
                    std::uint8_t code = outcome[i * grid + cell];
                    if (detect_task) {
                        if (code == 1) ++tp;
                        else if (code == 2) ++fp;
                        else if (code == 3) ++fn;
                    } else {
                        add_outcome(static_cast<MapOutcome>(code), tp, fp, fn);
                    }
                }
                Metrics m = Metrics::from_counts(tp, fn, fp);
                out << samples[si] << '\t' << cams[ci] << '\t' << votes[vi] << '\t' << tp << '\t'
                    << fp << '\t' << fn << '\t' << fmt6(m.recall) << '\t' << fmt6(m.precision)
                    << '\t' << fmt6(m.f1) << '\n';
                if (m.f1 > best_f1) {
                    best_f1 = m.f1;
                    best_s = samples[si];
                    best_c = cams[ci];
                    best_v = votes[vi];
                }
            }
    if (!out) throw IoError("short write to " + cfg.out);
    out.close();

    print_header(std::cout, "sweep", cfg.seed_sim, idx.seed_crossbar, idx.seed_cam, cfg.seed_noise);
    std::cout << "grid\t" << samples.size() << "x" << cams.size() << "x" << votes.size() << "\n";
    std::cout << "best\tmax_samples=" << best_s << "\tcam_threshold=" << best_c << "\tvotes_min="
              << best_v << "\tf1=" << fmt6(best_f1) << "\n";
    std::cout << "results\t" << cfg.out << "\n";
    return 0;
}

// -------------------------------------------------------------------- eval

inline std::map<std::string, std::string> parse_meta_line(std::string_view row) {
    std::map<std::string, std::string> meta;
    for (auto tok : split(row, '\t')) {
        std::size_t eq = tok.find('=');
        if (eq == std::string_view::npos) continue;
        meta[std::string(tok.substr(0, eq))] = std::string(tok.substr(eq + 1));
    }
    return meta;
}

inline int cmd_eval(const RunConfig& cfg) {
    require(cfg, "results", cfg.results);
    require(cfg, "truth", cfg.truth);

    std::ifstream in(cfg.results, std::ios::binary);
    if (!in) throw IoError("cannot open " + cfg.results);
    auto truth = truth_from_manifest(cfg.truth);

    std::string task;
    std::map<std::string, std::string> meta;
    std::vector<std::string> species;
    std::vector<ScoredMapping> mappings;
    std::vector<ScoredDetection> detections;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = strip(line);
        if (row.empty()) continue;
        if (row[0] == '#') {
            if (row.substr(0, 6) == "#meta\t") {
                meta = parse_meta_line(row.substr(6));
                auto it = meta.find("task");
                if (it != meta.end()) task = it->second;
            } else if (row.substr(0, 9) == "#species\t") {
                for (auto tok : split(row.substr(9), '\t')) species.emplace_back(tok);
            }
            continue;
        }
        auto fields = split(row, '\t');
        if (task == "map") {
            if (fields.size() != 10) throw ParseError(cfg.results, line_no, "expected 10 columns");
            ScoredMapping sm;
            sm.read_id = std::string(fields[0]);
            std::string_view dec = fields[1];
            if (dec == "mapped") sm.decision = Decision::Mapped;
            else if (dec == "mapped_boundary") sm.decision = Decision::MappedBoundary;
            else if (dec == "unmapped") sm.decision = Decision::Unmapped;
            else throw ParseError(cfg.results, line_no, "bad decision '" + std::string(dec) + "'");
            sm.species = fields[2] == "." ? "" : std::string(fields[2]);
            std::int64_t b1, b2;
            if (!parse_i64(fields[3], b1) || !parse_i64(fields[4], b2))
                throw ParseError(cfg.results, line_no, "bad bucket");
            sm.bucket = static_cast<std::int32_t>(b1);
            sm.bucket2 = static_cast<std::int32_t>(b2);
            mappings.push_back(std::move(sm));
        } else if (task == "detect") {
            if (fields.size() != 4) throw ParseError(cfg.results, line_no, "expected 4 columns");
            std::int64_t det;
            if (!parse_i64(fields[2], det)) throw ParseError(cfg.results, line_no, "bad detected flag");
            detections.push_back({std::string(fields[0]), det != 0});
        } else {
            throw ParseError(cfg.results, line_no,
                             "results file has no recognized '#meta task=map|detect' header");
        }
    }

    print_header(std::cout, "eval", cfg.seed_sim, cfg.seed_crossbar, cfg.seed_cam, cfg.seed_noise);
    if (task == "map") {
        ScoreParams p;
        auto need = [&](const char* key) {
            auto it = meta.find(key);
            if (it == meta.end())
                throw ParseError(cfg.results, 0, std::string("missing '") + key + "' in #meta header");
            std::int64_t v;
            if (!parse_i64(it->second, v))
                throw ParseError(cfg.results, 0, std::string("bad '") + key + "' in #meta header");
            return v;
        };
        p.k = static_cast<int>(need("k"));
        p.m = static_cast<std::uint32_t>(need("m"));
        p.bucket_size = static_cast<std::uint32_t>(need("bucket_size"));
        p.overlap_slack = cfg.is_set("overlap_slack") ? cfg.overlap_slack
                                                      : static_cast<std::uint32_t>(need("slack"));
        p.indexed_species = species;
        if (p.indexed_species.empty())
            throw ParseError(cfg.results, 0, "missing '#species' header");
        std::cout << "task\tmap\nreads\t" << mappings.size() << "\n";
        print_metrics(std::cout, score_mapping(p, mappings, truth));
    } else if (task == "detect") {
        auto it = meta.find("target");
        if (it == meta.end()) throw ParseError(cfg.results, 0, "missing 'target' in #meta header");
        std::cout << "task\tdetect\nreads\t" << detections.size() << "\n";
        print_metrics(std::cout, score_detection(it->second, detections, truth));
    } else {
        throw ParseError(cfg.results, 0, "results file has no '#meta task=...' header");
    }
    return 0;
}

}  // namespace cli

// Dispatches one invocation. Never lets an exception escape.
inline int run_cli(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
    try {
        if (args.empty() || args[0] == "--help" || args[0] == "help") {
            std::cout << cli::kUsage;
            return args.empty() ? 2 : 0;
        }
        const std::string& sub = args[0];
        if (sub == "keys") {
            for (const auto& k : config_keys()) std::cout << k << "\n";
            return 0;
        }
        RunConfig cfg = cli::parse_args(args, 1);
        if (sub == "simulate") return cli::cmd_simulate(cfg);
        if (sub == "index") return cli::cmd_index(cfg);
        if (sub == "map") return cli::cmd_map(cfg);
        if (sub == "detect") return cli::cmd_detect(cfg);
        if (sub == "abundance") return cli::cmd_abundance(cfg);
        if (sub == "sweep") return cli::cmd_sweep(cfg);
        if (sub == "eval") return cli::cmd_eval(cfg);
        throw UsageError("unknown subcommand '" + sub + "'");
    } catch (const VersionError& e) {
        err << "memvote: " << e.what() << "\n";
        return 3;
    } catch (const UsageError& e) {
        err << "memvote: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "memvote: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "memvote: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "memvote: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "memvote: internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace memvote
