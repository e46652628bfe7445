#include <catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "memvote/aligner.hpp"
#include "memvote/config.hpp"
#include "memvote/index_io.hpp"
#include "memvote/signal_io.hpp"

using namespace memvote;
using test_helpers::random_bases;
using test_helpers::read_file;
using test_helpers::synth_model;
using test_helpers::test_dir;
using test_helpers::write_file;

namespace {

std::vector<RawSignal> sample_reads(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RawSignal> reads;
    for (int i = 0; i < 5; ++i) {
        RawSignal r;
        r.read_id = "read" + std::to_string(i);
        r.sample_rate = 4000.0;
        std::size_t n = 10 + rng.uniform_int(200);
        r.samples.resize(n);
        for (auto& s : r.samples)
            s = static_cast<float>(60.0 + 60.0 * rng.uniform() + (rng.next() & 1 ? 1e-4 : -1e-4));
        reads.push_back(std::move(r));
    }
    return reads;
}

}  // namespace

TEST_CASE("text signals survive a round trip bit for bit", "[io]") {
    std::string dir = test_dir("io_text");
    auto reads = sample_reads(121);
    write_signals_text(dir + "/r.tsv", reads);
    auto back = read_signals_text(dir + "/r.tsv");
    REQUIRE(back.size() == reads.size());
    for (std::size_t i = 0; i < reads.size(); ++i) {
        REQUIRE(back[i].read_id == reads[i].read_id);
        REQUIRE(back[i].sample_rate == reads[i].sample_rate);
        REQUIRE(back[i].samples == reads[i].samples);
    }
}

TEST_CASE("binary signals survive a round trip bit for bit", "[io]") {
    std::string dir = test_dir("io_bin");
    auto reads = sample_reads(122);
    write_signals_binary(dir + "/r.bin", reads);
    auto back = read_signals_binary(dir + "/r.bin");
    REQUIRE(back.size() == reads.size());
    for (std::size_t i = 0; i < reads.size(); ++i) {
        REQUIRE(back[i].read_id == reads[i].read_id);
        REQUIRE(back[i].samples == reads[i].samples);
    }
}

TEST_CASE("signal readers reject unknown versions and malformed rows", "[io]") {
    std::string dir = test_dir("io_bad");
    write_file(dir + "/v2.tsv", "#memvote signals v2\nx\t4000\t1,2,3\n");
    REQUIRE_THROWS_AS(read_signals_text(dir + "/v2.tsv"), VersionError);

    write_file(dir + "/cols.tsv", "#memvote signals v1\nx\t4000\n");
    REQUIRE_THROWS_AS(read_signals_text(dir + "/cols.tsv"), ParseError);

    write_file(dir + "/rate.tsv", "#memvote signals v1\nx\t-1\t1,2\n");
    REQUIRE_THROWS_AS(read_signals_text(dir + "/rate.tsv"), ParseError);

    write_file(dir + "/empty.tsv", "#memvote signals v1\n#read_id\tsample_rate\tsamples\n");
    REQUIRE(read_signals_text(dir + "/empty.tsv").empty());

    write_file(dir + "/r.bin.hdr", "#memvote sigbin v1\nx\t4000\t0\t100\n");
    write_file(dir + "/r.bin", std::string(16, '\0'));
    REQUIRE_THROWS_AS(read_signals_binary(dir + "/r.bin"), ParseError);

    REQUIRE_THROWS_AS(read_signals_text(dir + "/missing.tsv"), IoError);
}

TEST_CASE("manifests round trip", "[io]") {
    std::string dir = test_dir("io_manifest");
    std::vector<ManifestRow> rows{{"r0", "virus", 0, 78}, {"r1", "human", 120, 450}};
    write_manifest(dir + "/m.tsv", rows);
    auto back = read_manifest(dir + "/m.tsv");
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].read_id == "r0");
    REQUIRE(back[0].species == "virus");
    REQUIRE(back[1].start == 120);
    REQUIRE(back[1].length == 450);
}

TEST_CASE("an index reloads into an identical search structure", "[io]") {
    std::string dir = test_dir("io_index");
    PoreModel model = synth_model(123);
    Rng rng(124);
    std::vector<ReferenceSequence> refs{{"a", random_bases(rng, 90)},
                                        {"b", random_bases(rng, 120)}};
    AlignConfig cfg;
    cfg.bucket_size = 30;
    cfg.center_seeds = true;
    DeviceModel dev;
    ReferenceIndex idx = build_index(refs, model, cfg, dev, 125, 126);

    save_index(dir + "/x.idx", idx);
    ReferenceIndex back = load_index(dir + "/x.idx");

    REQUIRE(back.cfg.m == cfg.m);
    REQUIRE(back.cfg.hash_bits == cfg.hash_bits);
    REQUIRE(back.cfg.bucket_size == 30);
    REQUIRE(back.cfg.center_seeds == true);
    REQUIRE(back.seed_crossbar == 125);
    REQUIRE(back.seed_cam == 126);
    REQUIRE(back.model_k == model.k);
    REQUIRE(back.model_global_mean == idx.model_global_mean);
    REQUIRE(back.crossbar.conductance == idx.crossbar.conductance);
    REQUIRE(back.crossbar.g_eff == idx.crossbar.g_eff);
    REQUIRE(back.species.size() == 2);
    for (std::size_t sp = 0; sp < 2; ++sp) {
        REQUIRE(back.species[sp].id == idx.species[sp].id);
        REQUIRE(back.species[sp].n_events == idx.species[sp].n_events);
        REQUIRE(back.species[sp].n_buckets == idx.species[sp].n_buckets);
        REQUIRE(back.species[sp].cam.stored == idx.species[sp].cam.stored);
        REQUIRE(back.species[sp].cam.g == idx.species[sp].cam.g);
        REQUIRE(back.species[sp].cam.row_bucket == idx.species[sp].cam.row_bucket);
        REQUIRE(back.species[sp].cam.dev.v_read == dev.v_read);
    }

    // Same queries, same votes.
    Rng qrng(127);
    std::vector<SeedHash> queries;
    for (int i = 0; i < 10; ++i) {
        SeedHash h;
        h.nbits = cfg.hash_bits;
        h.words.assign(SeedHash::word_count(cfg.hash_bits), 0);
        for (std::uint32_t j = 0; j < cfg.hash_bits; ++j)
            if (qrng.next() & 1) h.set_bit(j);
        queries.push_back(std::move(h));
    }
    VoteTally t1 = tally_votes(idx, queries, 12, SearchBackend::Analog);
    VoteTally t2 = tally_votes(back, queries, 12, SearchBackend::Analog);
    REQUIRE(t1.votes == t2.votes);

    // Saving the reloaded index reproduces the file byte for byte.
    save_index(dir + "/y.idx", back);
    REQUIRE(read_file(dir + "/x.idx") == read_file(dir + "/y.idx"));
}

TEST_CASE("index loading rejects foreign and future files", "[io]") {
    std::string dir = test_dir("io_index_bad");
    write_file(dir + "/junk.idx", "this is not an index file at all");
    REQUIRE_THROWS_AS(load_index(dir + "/junk.idx"), ParseError);

    // Correct magic, bumped version.
    std::uint32_t magic = kIndexMagic;
    std::uint16_t version = kIndexVersion + 1;
    std::string bytes(reinterpret_cast<const char*>(&magic), 4);
    bytes.append(reinterpret_cast<const char*>(&version), 2);
    bytes.append(16, '\0');
    write_file(dir + "/future.idx", bytes);
    REQUIRE_THROWS_AS(load_index(dir + "/future.idx"), VersionError);

    write_file(dir + "/trunc.idx", std::string(reinterpret_cast<const char*>(&magic), 4));
    REQUIRE_THROWS_AS(load_index(dir + "/trunc.idx"), ParseError);

    REQUIRE_THROWS_AS(load_index(dir + "/missing.idx"), IoError);
}

TEST_CASE("config keys parse typed values and reject unknowns", "[io]") {
    RunConfig cfg;
    apply_config_key(cfg, "cam_threshold", "16");
    REQUIRE(cfg.align.cam_threshold == 16);
    REQUIRE(cfg.is_set("cam_threshold"));
    REQUIRE_FALSE(cfg.is_set("votes_min"));

    apply_config_key(cfg, "votes_min", "7");
    REQUIRE(cfg.align.votes_min == 7);
    apply_config_key(cfg, "backend", "digital");
    REQUIRE(cfg.align.backend == SearchBackend::Digital);
    apply_config_key(cfg, "center_seeds", "true");
    REQUIRE(cfg.align.center_seeds);
    apply_config_key(cfg, "diff_threshold", "4.5");
    REQUIRE(cfg.align.diff_threshold == 4.5);
    REQUIRE(cfg.align.detector.diff_threshold == 4.5);
    apply_config_key(cfg, "counts", "1000,2000");
    REQUIRE(cfg.counts == std::vector<std::uint32_t>{1000, 2000});
    apply_config_key(cfg, "seed_noise", "99");
    REQUIRE(cfg.seed_noise == 99);

    REQUIRE_THROWS_AS(apply_config_key(cfg, "no_such_key", "1"), std::invalid_argument);
    REQUIRE_THROWS_AS(apply_config_key(cfg, "cam_threshold", "xyz"), std::invalid_argument);
    REQUIRE_THROWS_AS(apply_config_key(cfg, "backend", "quantum"), std::invalid_argument);

    for (const auto& k : config_keys()) {
        INFO(k);
        REQUIRE(k.find(' ') == std::string::npos);
    }
}

TEST_CASE("config files allow comments and report bad lines", "[io]") {
    std::string dir = test_dir("io_config");
    write_file(dir + "/good.cfg",
               "# run setup\ncam_threshold = 12\nvotes_min = 5\n\nbackend = analog\n");
    RunConfig cfg;
    load_config_file(cfg, dir + "/good.cfg");
    REQUIRE(cfg.align.cam_threshold == 12);
    REQUIRE(cfg.align.votes_min == 5);
    REQUIRE(cfg.align.backend == SearchBackend::Analog);

    write_file(dir + "/bad.cfg", "cam_threshold = 12\nwhat is this\n");
    RunConfig cfg2;
    try {
        load_config_file(cfg2, dir + "/bad.cfg");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("2") != std::string::npos);
    }

    write_file(dir + "/unknown.cfg", "shoe_size = 9\n");
    RunConfig cfg3;
    REQUIRE_THROWS_AS(load_config_file(cfg3, dir + "/unknown.cfg"), ParseError);
}

TEST_CASE("sweep grids parse ranges, strides, and lists", "[io]") {
    REQUIRE(parse_grid("g", "0:32").size() == 33);
    REQUIRE(parse_grid("g", "0:32").front() == 0);
    REQUIRE(parse_grid("g", "0:32").back() == 32);
    REQUIRE(parse_grid("g", "1:15") == std::vector<std::int32_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                                                                 11, 12, 13, 14, 15});
    REQUIRE(parse_grid("g", "0:32:8") == std::vector<std::int32_t>{0, 8, 16, 24, 32});
    REQUIRE(parse_grid("g", "500,1000,2000,4000,8000") ==
            std::vector<std::int32_t>{500, 1000, 2000, 4000, 8000});
    REQUIRE(parse_grid("g", "7") == std::vector<std::int32_t>{7});
    REQUIRE_THROWS_AS(parse_grid("g", "5:1"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_grid("g", ""), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_grid("g", "a:b"), std::invalid_argument);
}
