#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "phg/cli.hpp"
#include "phg/error.hpp"
#include "phg/io.hpp"
#include "support.hpp"

using namespace phg;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run phg_run(std::vector<std::string> args) {
    args.insert(args.begin(), "phg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("phg_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen reports monomial counts") {
    const Run cyc = phg_run({"gen", "cyclic", "--n", "14"});
    CHECK(cyc.code == 0);
    CHECK(cyc.err.find("m=184 N=15") != std::string::npos);
    CHECK(parse_system(cyc.out).m() == 184);

    const Run ch = phg_run({"gen", "chandra", "--n", "24"});
    CHECK(ch.code == 0);
    CHECK(ch.err.find("m=324 N=25") != std::string::npos);

    const Run r1 = phg_run({"gen", "random", "--n", "3", "--m", "9", "--seed", "7"});
    const Run r2 = phg_run({"gen", "random", "--n", "3", "--m", "9", "--seed", "7"});
    CHECK(r1.code == 0);
    CHECK(r1.out == r2.out);
    CHECK(parse_system(r1.out).m() == 9);

    CHECK(phg_run({"gen", "katsura", "--n", "3"}).code == 1);
    CHECK(phg_run({"gen", "cyclic"}).code == 1);
    CHECK(phg_run({}).code == 1);
}

TEST_CASE("eval writes extended Jacobian blocks") {
    TempDir dir("eval");
    write_text_file(dir.file("sys.json"), serialize_system(test::two_term_system()));
    write_text_file(dir.file("pts.json"), R"({"tau0": 0, "points": [[[1, 0]]]})");
    const Run r = phg_run({"eval", "--system", dir.file("sys.json"), "--points", dir.file("pts.json"), "--check-oracle"});
    REQUIRE(r.code == 0);
    const EvalReport rep = parse_eval_report(r.out);
    REQUIRE(rep.blocks.size() == 1);
    CHECK(max_abs_diff(rep.blocks[0], ComplexMatrix::from_rows({{2.0, 3.0, 8.0, 5.0}})) <= 1e-14);
    REQUIRE(rep.oracle_max_rel_dev);
    CHECK(*rep.oracle_max_rel_dev <= 1e-11);
    CHECK(r.err.find("oracle max relative deviation") != std::string::npos);

    SUBCASE("output file") {
        const Run w = phg_run({"eval", "--system", dir.file("sys.json"), "--points", dir.file("pts.json"), "--out",
                               dir.file("out.json")});
        CHECK(w.code == 0);
        CHECK(w.out.empty());
        CHECK(parse_eval_report(read_text_file(dir.file("out.json"))).blocks == rep.blocks);
    }
    SUBCASE("zero coordinate names the point") {
        write_text_file(dir.file("bad.json"), R"({"tau0": 0, "points": [[[1, 0]], [[2, 0]], [[0, 0]]]})");
        const Run b = phg_run({"eval", "--system", dir.file("sys.json"), "--points", dir.file("bad.json")});
        CHECK(b.code == 2);
        CHECK(b.err.find("ZeroCoordinate") != std::string::npos);
        CHECK(b.err.find("point 2") != std::string::npos);
    }
    SUBCASE("shape mismatch shows both shapes") {
        write_text_file(dir.file("wide.json"), R"({"tau0": 0, "points": [[[1, 0], [1, 0], [1, 0]]]})");
        const Run b = phg_run({"eval", "--system", dir.file("sys.json"), "--points", dir.file("wide.json")});
        CHECK(b.code == 2);
        CHECK(b.err.find("ShapeError") != std::string::npos);
        CHECK(b.err.find("3 coordinates") != std::string::npos);
        CHECK(b.err.find("needs 2") != std::string::npos);
    }
    SUBCASE("malformed input") {
        write_text_file(dir.file("broken.json"), "{\"tau0\": 0, \"points\": [[[1, 0]]\n");
        const Run b = phg_run({"eval", "--system", dir.file("sys.json"), "--points", dir.file("broken.json")});
        CHECK(b.code == 2);
        CHECK(b.err.find("ParseError") != std::string::npos);
        CHECK(phg_run({"eval", "--system", dir.file("missing.json"), "--points", dir.file("pts.json")}).code == 1);
        CHECK(phg_run({"eval", "--system", dir.file("sys.json"), "--points", dir.file("pts.json"), "--backend",
                       "gpu"})
                  .code == 1);
    }
}

TEST_CASE("track end to end") {
    TempDir dir("track");
    const Run g = phg_run({"gen", "random", "--n", "2", "--m", "7", "--seed", "3", "--tau0", "-10", "--points", "4",
                           "--points-out", dir.file("pts.json"), "--out", dir.file("sys.json")});
    REQUIRE(g.code == 0);
    CHECK(g.out.find("m=7 N=3") != std::string::npos);

    const Run t = phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("pts.json")});
    REQUIRE(t.code == 0);
    const TrackReport rep = parse_track_results(t.out);
    REQUIRE(rep.results.size() == 4);
    CHECK(rep.summary.counts.at("Converged") == 4);
    for (const auto& r : rep.results) {
        CHECK(r.tau == 0.0);
        CHECK(r.residual <= 1e-8);
    }
    CHECK(t.err.find("4 paths") != std::string::npos);

    const Run again = phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("pts.json")});
    const TrackReport rep2 = parse_track_results(again.out);
    for (std::size_t i = 0; i < 4; ++i) CHECK(rep2.results[i].y == rep.results[i].y);

    const Run fixed = phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("pts.json"),
                               "--fixed-steps", "50", "--newton-iters", "2"});
    CHECK(fixed.code == 0);
    for (const auto& r : parse_track_results(fixed.out).results) CHECK(r.steps_taken == 50);

    write_text_file(dir.file("empty.json"), R"({"tau0": -10, "points": []})");
    const Run e = phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("empty.json")});
    CHECK(e.code == 0);
    CHECK(e.err.find("0 paths") != std::string::npos);
    CHECK(parse_track_results(e.out).results.empty());

    write_text_file(dir.file("off.json"), R"({"tau0": -10, "points": [[[3, 1], [5, 2]]]})");
    const Run off = phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("off.json")});
    CHECK(off.code == 2);
    CHECK(off.err.find("StartPointInvalid") != std::string::npos);

    CHECK(phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("pts.json"), "--tau0", "0"}).code ==
          1);
    CHECK(phg_run({"track", "--system", dir.file("sys.json"), "--points", dir.file("pts.json"), "--fixed-steps", "0"})
              .code == 1);
}

TEST_CASE("bench writes one CSV row per count") {
    TempDir dir("bench");
    REQUIRE(phg_run({"gen", "cyclic", "--n", "4", "--out", dir.file("sys.json")}).code == 0);
    const Run b = phg_run({"bench", "--system", dir.file("sys.json"), "--counts", "2,5", "--repetitions", "2",
                           "--fixed-steps", "20", "--newton-iters", "1"});
    REQUIRE(b.code == 0);
    const auto rows = parse_bench_csv(b.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].points == 2);
    CHECK(rows[1].points == 5);
    for (const auto& r : rows) {
        REQUIRE(r.mean_seconds);
        CHECK(*r.mean_seconds > 0.0);
        CHECK(r.backend == "reference");
    }
    CHECK(phg_run({"bench", "--system", dir.file("sys.json"), "--repetitions", "0"}).code == 1);
}

TEST_CASE("exit codes by error kind") {
    CHECK(exit_code_for(UsageError("x")) == 1);
    CHECK(exit_code_for(ShapeError("x")) == 2);
    CHECK(exit_code_for(ZeroCoordinate(0, 0)) == 2);
    CHECK(exit_code_for(StartPointInvalid(0, 1.0)) == 2);
    CHECK(exit_code_for(MonomialOverflow(0)) == 3);
    CHECK(exit_code_for(SingularJacobian(0)) == 3);
    CHECK(exit_code_for(DegenerateTangent(0)) == 3);
}

TEST_CASE("seeded starts lie on the path") {
    const LaurentSystem sys = gen_cyclic(5);
    const SeededStarts s = seeded_on_path_starts(sys, 6, -20.0, 11);
    const HomotopyTables t = build_tables(homogenize(s.system));
    const auto res = batch_residuals(s.starts, t, ReferenceBackend{});
    for (double r : res) CHECK(r <= 1e-6);
    const SeededStarts again = seeded_on_path_starts(sys, 6, -20.0, 11);
    CHECK(again.starts.y == s.starts.y);
}
