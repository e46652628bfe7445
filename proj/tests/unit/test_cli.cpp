#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "memvote/cli.hpp"
#include "helpers.hpp"

using namespace memvote;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

// Runs one invocation in-process with stdout and stderr captured.
CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    std::streambuf* saved = std::cout.rdbuf(out.rdbuf());
    int code = -1;
    try {
        code = run_cli(args, err);
    } catch (...) {
        std::cout.rdbuf(saved);
        throw;
    }
    std::cout.rdbuf(saved);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

void write_fasta(const std::string& path, const std::vector<std::pair<std::string, std::string>>& recs) {
    std::ostringstream os;
    for (const auto& [id, seq] : recs) {
        os << '>' << id << '\n';
        for (std::size_t i = 0; i < seq.size(); i += 70)
            os << seq.substr(i, 70) << '\n';
    }
    test_helpers::write_file(path, os.str());
}

// One tiny two-species workspace shared by the end-to-end sections.
struct Workspace {
    std::string dir;
    std::string model, ref2, ref1;

    explicit Workspace(const std::string& name) : dir(test_helpers::test_dir(name)) {
        model = dir + "/model.tsv";
        test_helpers::write_model_file(model, 411);
        Rng rng(640);
        ref2 = dir + "/ref2.fa";
        write_fasta(ref2, {{"spA", test_helpers::random_bases(rng, 600)},
                           {"spB", test_helpers::random_bases(rng, 600)}});
        Rng rng1(641);
        ref1 = dir + "/ref1.fa";
        write_fasta(ref1, {{"spA", test_helpers::random_bases(rng1, 600)}});
    }
};

}  // namespace

TEST_CASE("usage, help, and dispatch errors", "[cli]") {
    auto empty = run({});
    CHECK(empty.exit_code == 2);
    CHECK(contains(empty.out, "usage"));

    auto help = run({"--help"});
    CHECK(help.exit_code == 0);
    CHECK(contains(help.out, "simulate"));
    CHECK(contains(help.out, "sweep"));

    auto keys = run({"keys"});
    CHECK(keys.exit_code == 0);
    CHECK(contains(keys.out, "cam_threshold\n"));
    CHECK(contains(keys.out, "seed_noise\n"));

    auto unknown = run({"frobnicate"});
    CHECK(unknown.exit_code == 2);
    CHECK(contains(unknown.err, "frobnicate"));

    auto badflag = run({"simulate", "--no-such-flag", "1"});
    CHECK(badflag.exit_code == 2);
    CHECK(contains(badflag.err, "no_such_flag"));

    auto badvalue = run({"map", "--cam-threshold", "abc"});
    CHECK(badvalue.exit_code == 2);
    CHECK(contains(badvalue.err, "cam_threshold"));

    auto missing = run({"map"});
    CHECK(missing.exit_code == 2);
    CHECK(contains(missing.err, "index"));
}

TEST_CASE("simulate, index, map, eval round trip", "[cli]") {
    Workspace ws("cli_flow");

    auto sim = run({"simulate", "--reference", ws.ref2, "--model", ws.model,
                    "--out", ws.dir + "/sim", "--counts", "3,3", "--read-length", "300",
                    "--seed-sim", "11", "--current-noise-stdv", "1.0"});
    REQUIRE(sim.exit_code == 0);
    CHECK(contains(sim.out, "total_reads\t6\n"));
    CHECK(contains(sim.out, "reads\tspA\t3\n"));
    REQUIRE(fs::exists(ws.dir + "/sim.signals.tsv"));
    REQUIRE(fs::exists(ws.dir + "/sim.manifest.tsv"));

    std::vector<std::string> index_args = {
        "index", "--reference", ws.ref2, "--model", ws.model, "--bucket-size", "100",
        "--center-seeds", "true", "--seed-crossbar", "21", "--seed-cam", "22"};

    auto idx_args1 = index_args;
    idx_args1.insert(idx_args1.end(), {"--out", ws.dir + "/idx.mvx"});
    auto idx = run(idx_args1);
    REQUIRE(idx.exit_code == 0);
    CHECK(contains(idx.out, "crossbar\tm=10\tbits=128\n"));
    CHECK(contains(idx.out, "species\tspA\t"));

    SECTION("same seeds give a byte-identical index file") {
        auto idx_args2 = index_args;
        idx_args2.insert(idx_args2.end(), {"--out", ws.dir + "/idx_again.mvx"});
        REQUIRE(run(idx_args2).exit_code == 0);
        CHECK(test_helpers::read_file(ws.dir + "/idx.mvx") ==
              test_helpers::read_file(ws.dir + "/idx_again.mvx"));
    }

    SECTION("map emits one row per read and scores against truth") {
        std::vector<std::string> map_args = {
            "map", "--index", ws.dir + "/idx.mvx", "--reads", ws.dir + "/sim.signals.tsv",
            "--truth", ws.dir + "/sim.manifest.tsv", "--cam-threshold", "12", "--votes-min", "1"};
        auto map_args1 = map_args;
        map_args1.insert(map_args1.end(), {"--out", ws.dir + "/res.tsv"});
        auto mp = run(map_args1);
        REQUIRE(mp.exit_code == 0);
        CHECK(contains(mp.out, "reads\t6\n"));
        CHECK(contains(mp.out, "recall\t"));

        std::string res = test_helpers::read_file(ws.dir + "/res.tsv");
        CHECK(res.rfind("# memvote map v1\n", 0) == 0);
        CHECK(contains(res, "#meta\ttask=map\tk=6\tm=10\tbucket_size=100\t"));
        CHECK(contains(res, "#species\tspA\tspB\n"));
        CHECK(count_lines(res) == 5 + 6);

        auto map_args2 = map_args;
        map_args2.insert(map_args2.end(), {"--out", ws.dir + "/res_again.tsv"});
        REQUIRE(run(map_args2).exit_code == 0);
        CHECK(test_helpers::read_file(ws.dir + "/res_again.tsv") == res);

        auto ev = run({"eval", "--results", ws.dir + "/res.tsv",
                       "--truth", ws.dir + "/sim.manifest.tsv"});
        REQUIRE(ev.exit_code == 0);
        CHECK(contains(ev.out, "task\tmap\nreads\t6\n"));
        CHECK(contains(ev.out, "f1\t"));
    }

    SECTION("flags override config file values") {
        test_helpers::write_file(ws.dir + "/run.cfg",
                                 "# run defaults\ncam_threshold = 9\nvotes_min = 2\n");
        auto mp = run({"map", "--config", ws.dir + "/run.cfg", "--votes-min", "3",
                       "--index", ws.dir + "/idx.mvx", "--reads", ws.dir + "/sim.signals.tsv",
                       "--out", ws.dir + "/res_cfg.tsv"});
        REQUIRE(mp.exit_code == 0);
        std::string res = test_helpers::read_file(ws.dir + "/res_cfg.tsv");
        CHECK(contains(res, "\tcam_threshold=9\t"));
        CHECK(contains(res, "\tvotes_min=3\t"));
    }

    SECTION("empty reads file maps to a header-only results file") {
        write_signals_text(ws.dir + "/none.signals.tsv", {});
        auto mp = run({"map", "--index", ws.dir + "/idx.mvx",
                       "--reads", ws.dir + "/none.signals.tsv",
                       "--truth", ws.dir + "/sim.manifest.tsv",
                       "--out", ws.dir + "/res_none.tsv"});
        REQUIRE(mp.exit_code == 0);
        CHECK(contains(mp.out, "reads\t0\n"));
        CHECK(contains(mp.out, "tp\t0\n"));
        CHECK(count_lines(test_helpers::read_file(ws.dir + "/res_none.tsv")) == 5);
    }

    SECTION("abundance tallies per-species read counts") {
        auto ab = run({"abundance", "--index", ws.dir + "/idx.mvx",
                       "--reads", ws.dir + "/sim.signals.tsv",
                       "--truth", ws.dir + "/sim.manifest.tsv",
                       "--cam-threshold", "12", "--votes-min", "1",
                       "--out", ws.dir + "/ab.tsv"});
        REQUIRE(ab.exit_code == 0);
        CHECK(contains(ab.out, "abundance\tspA\t"));
        CHECK(contains(ab.out, "accuracy\t"));
        CHECK(contains(ab.out, "#confusion\ttruth\tspA\tspB\tunclassified\n"));
        CHECK(count_lines(test_helpers::read_file(ws.dir + "/ab.tsv")) == 5 + 6);
    }

    SECTION("sweep prints the full threshold grid deterministically") {
        std::vector<std::string> sweep_args = {
            "sweep", "--index", ws.dir + "/idx.mvx", "--reads", ws.dir + "/sim.signals.tsv",
            "--truth", ws.dir + "/sim.manifest.tsv",
            "--sweep-cam", "0:4:2", "--sweep-votes", "1:3"};
        auto args1 = sweep_args;
        args1.insert(args1.end(), {"--out", ws.dir + "/sw.tsv"});
        auto sw = run(args1);
        REQUIRE(sw.exit_code == 0);
        CHECK(contains(sw.out, "grid\t1x3x3\n"));
        CHECK(contains(sw.out, "best\tmax_samples="));

        std::string grid = test_helpers::read_file(ws.dir + "/sw.tsv");
        CHECK(count_lines(grid) == 4 + 9);
        CHECK(contains(grid, "#max_samples\tcam_threshold\tvotes_min\ttp\tfp\tfn\trecall\tprecision\tf1\n"));

        auto args2 = sweep_args;
        args2.insert(args2.end(), {"--out", ws.dir + "/sw_again.tsv"});
        REQUIRE(run(args2).exit_code == 0);
        CHECK(test_helpers::read_file(ws.dir + "/sw_again.tsv") == grid);
    }
}

TEST_CASE("detect requires a single-species index", "[cli]") {
    Workspace ws("cli_detect");

    REQUIRE(run({"index", "--reference", ws.ref2, "--model", ws.model,
                 "--out", ws.dir + "/idx2.mvx", "--bucket-size", "100"})
                .exit_code == 0);
    REQUIRE(run({"index", "--reference", ws.ref1, "--model", ws.model,
                 "--out", ws.dir + "/idx1.mvx", "--bucket-size", "100",
                 "--center-seeds", "true"})
                .exit_code == 0);
    REQUIRE(run({"simulate", "--reference", ws.ref1, "--model", ws.model,
                 "--out", ws.dir + "/sim", "--counts", "4", "--read-length", "300",
                 "--seed-sim", "12"})
                .exit_code == 0);

    auto multi = run({"detect", "--index", ws.dir + "/idx2.mvx",
                      "--reads", ws.dir + "/sim.signals.tsv", "--out", ws.dir + "/d.tsv"});
    CHECK(multi.exit_code == 2);
    CHECK(contains(multi.err, "single"));

    auto det = run({"detect", "--index", ws.dir + "/idx1.mvx",
                    "--reads", ws.dir + "/sim.signals.tsv",
                    "--truth", ws.dir + "/sim.manifest.tsv",
                    "--votes-min", "1", "--out", ws.dir + "/d.tsv"});
    REQUIRE(det.exit_code == 0);
    CHECK(contains(det.out, "reads\t4\n"));

    std::string res = test_helpers::read_file(ws.dir + "/d.tsv");
    CHECK(contains(res, "#meta\ttask=detect\ttarget=spA\t"));
    CHECK(count_lines(res) == 4 + 4);

    auto ev = run({"eval", "--results", ws.dir + "/d.tsv",
                   "--truth", ws.dir + "/sim.manifest.tsv"});
    REQUIRE(ev.exit_code == 0);
    CHECK(contains(ev.out, "task\tdetect\nreads\t4\n"));
}

TEST_CASE("io failures map to the documented exit codes", "[cli]") {
    auto ws = test_helpers::test_dir("cli_errors");
    std::string model = ws + "/model.tsv";
    test_helpers::write_model_file(model, 412);
    Rng rng(642);
    write_fasta(ws + "/ref.fa", {{"sp", test_helpers::random_bases(rng, 200)}});

    auto missing_model = run({"index", "--reference", ws + "/ref.fa",
                              "--model", ws + "/nope.tsv", "--out", ws + "/i.mvx"});
    CHECK(missing_model.exit_code == 2);
    CHECK(contains(missing_model.err, ws + "/nope.tsv"));

    auto missing_reads = run({"map", "--index", ws + "/i.mvx", "--reads", ws + "/nope.tsv",
                              "--out", ws + "/r.tsv"});
    CHECK(missing_reads.exit_code == 2);

    REQUIRE(run({"index", "--reference", ws + "/ref.fa", "--model", model,
                 "--out", ws + "/i.mvx", "--bucket-size", "50"})
                .exit_code == 0);

    test_helpers::write_file(ws + "/future.signals.tsv",
                             "#memvote signals v2\n#read_id\tsample_rate\tsamples\n");
    auto future = run({"map", "--index", ws + "/i.mvx",
                       "--reads", ws + "/future.signals.tsv", "--out", ws + "/r.tsv"});
    CHECK(future.exit_code == 3);
    CHECK(contains(future.err, "version"));

    test_helpers::write_file(ws + "/garbage.signals.tsv", "#memvote signals v1\nnot\tenough\n");
    auto garbage = run({"map", "--index", ws + "/i.mvx",
                        "--reads", ws + "/garbage.signals.tsv", "--out", ws + "/r.tsv"});
    CHECK(garbage.exit_code == 2);

    auto bad_cfg = run({"map", "--config", ws + "/no.cfg"});
    CHECK(bad_cfg.exit_code == 2);
}
