// Drives the installed binary end to end through std::system. The binary
// path arrives via the KTMASK_BIN environment variable set by CMake.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "catch_amalgamated.hpp"
#include "ktmask/core.hpp"
#include "ktmask/io.hpp"

using namespace ktmask;
namespace fs = std::filesystem;

namespace {

std::string bin_path() {
    const char* p = std::getenv("KTMASK_BIN");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& tail) {
    int status = std::system((bin_path() + " " + tail).c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("ktmask_cli_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

} // namespace

TEST_CASE("cli pipeline: phantom, design, eval produce consistent artifacts", "[cli]") {
    TempDir dir("pipeline");
    write_text(dir.file("run.cfg"), "[phantom]\n"
                                    "size = 8\nframes = 2\ncount = 3\nseed = 5\n"
                                    "[design]\n"
                                    "variant = sg\ntraining = v2\nsample_batch = 3\ntrain_batch = 1\n"
                                    "rates = 0.4, 0.2\nseed = 9\ndecoder = zf\n"
                                    "train = phantom_000.vol, phantom_001.vol\n"
                                    "[eval]\n"
                                    "mask = design/mask_01.txt\n"
                                    "volumes = phantom_000.vol, phantom_002.vol\n"
                                    "decoder = zf\n");
    const std::string cfg = " --config " + dir.file("run.cfg");
    REQUIRE(run("phantom" + cfg + " --out " + dir.path.string() + " > /dev/null") == 0);
    CHECK(fs::exists(dir.file("phantom_002.vol")));
    CHECK(fs::exists(dir.file("phantom_000.vol.meta")));

    REQUIRE(run("design" + cfg + " --out " + dir.file("design") + " > /dev/null") == 0);
    Mask low = read_mask(dir.file("design/mask_00.txt"));
    Mask high = read_mask(dir.file("design/mask_01.txt"));
    REQUIRE(low.line_count() == 3);  // 20% of 16
    REQUIRE(high.line_count() == 6); // 40% of 16
    CHECK(low.lines == high.prefix(3).lines); // one nested run serves both rates

    auto summary = read_lines(dir.file("design/design.csv"));
    REQUIRE(summary.size() == 3);
    CHECK(summary[0] == "file,rate,lines,calls");
    CHECK(split_csv(summary[1])[0] == "mask_00.txt");

    REQUIRE(run("eval" + cfg + " --out " + dir.file("ev") + " > /dev/null") == 0);
    auto lines = read_lines(dir.file("ev/eval.csv"));
    REQUIRE(lines.size() == 4); // header + 2 volumes + mean
    CHECK(lines[0] == "volume,metric,value,calls,note");
    double a = std::stod(split_csv(lines[1])[2]);
    double b = std::stod(split_csv(lines[2])[2]);
    auto mean_cells = split_csv(lines[3]);
    CHECK(mean_cells[0] == "mean");
    CHECK(std::stod(mean_cells[2]) == Catch::Approx((a + b) / 2).epsilon(1e-4));
    CHECK(mean_cells[3] == "2");
}

TEST_CASE("cli rerun and thread-count invariance produce identical bytes", "[cli]") {
    TempDir dir("threads");
    write_text(dir.file("run.cfg"), "[phantom]\n"
                                    "size = 8\nframes = 2\ncount = 2\nseed = 3\n"
                                    "[design]\n"
                                    "variant = sg\ntraining = v2\nsample_batch = 4\ntrain_batch = 1\n"
                                    "budget = 6\nseed = 11\ndecoder = ist iters=8\n"
                                    "train = phantom_000.vol, phantom_001.vol\n");
    const std::string cfg = " --config " + dir.file("run.cfg");
    REQUIRE(run("phantom" + cfg + " --out " + dir.path.string() + " > /dev/null") == 0);
    REQUIRE(run("phantom" + cfg + " --out " + dir.file("again") + " > /dev/null") == 0);
    CHECK(read_text(dir.file("phantom_001.vol")) == read_text(dir.file("again/phantom_001.vol")));

    REQUIRE(run("design" + cfg + " --out " + dir.file("t1") + " --threads 1 > /dev/null") == 0);
    REQUIRE(run("design" + cfg + " --out " + dir.file("t4") + " --threads 4 > /dev/null") == 0);
    for (const char* name : {"mask.txt", "trace.txt", "design.csv"}) {
        INFO(name);
        auto a = read_text(dir.file(std::string("t1/") + name));
        CHECK_FALSE(a.empty());
        CHECK(a == read_text(dir.file(std::string("t4/") + name)));
    }
}

TEST_CASE("cli design with budget zero writes an empty mask and exits cleanly", "[cli]") {
    TempDir dir("zero");
    write_text(dir.file("run.cfg"), "[phantom]\nsize = 8\nframes = 2\ncount = 1\n"
                                    "[design]\nvariant = g\nbudget = 0\ntrain = phantom_000.vol\n");
    const std::string cfg = " --config " + dir.file("run.cfg");
    REQUIRE(run("phantom" + cfg + " --out " + dir.path.string() + " > /dev/null") == 0);
    REQUIRE(run("design" + cfg + " --out " + dir.file("d") + " > /dev/null") == 0);
    auto lines = read_lines(dir.file("d/mask.txt"));
    REQUIRE(lines.size() == 1);
    CHECK(lines[0] == "8 2 0");
}

TEST_CASE("cli eval prints the infinity sentinel at full sampling and error rows for no data", "[cli]") {
    TempDir dir("sentinel");
    // constant image: every transform butterfly sees equal values, so the
    // full-mask round trip is bit-exact and the sentinel is reachable
    DynamicImage flat(4, 2);
    for (auto& v : flat.data) v = {1.0, 0.0};
    write_volume(dir.file("flat.vol"), flat);
    write_text(dir.file("run.cfg"), "[eval]\nmask = full.txt\nvolumes = flat.vol\ndecoder = zf\n");
    const std::string cfg = " --config " + dir.file("run.cfg");

    std::ostringstream full;
    full << "4 2 8\n";
    for (int t = 0; t < 2; ++t)
        for (int y = 0; y < 4; ++y) full << t << " " << y << "\n";
    write_text(dir.file("full.txt"), full.str());
    REQUIRE(run("eval" + cfg + " --out " + dir.file("f") + " > /dev/null") == 0);
    auto rows = read_lines(dir.file("f/eval.csv"));
    CHECK(split_csv(rows[1])[2] == "inf"); // size-4 transforms round-trip bit-exactly
    CHECK(split_csv(rows[2])[2] == "inf");

    write_text(dir.file("empty.txt"), "4 2 0\n");
    write_text(dir.file("ev2.cfg"), "[eval]\nmask = empty.txt\nvolumes = flat.vol\ndecoder = ist\n");
    REQUIRE(run("eval --config " + dir.file("ev2.cfg") + " --out " + dir.file("e") + " > /dev/null") == 0);
    rows = read_lines(dir.file("e/eval.csv"));
    auto cells = split_csv(rows[1]);
    CHECK(cells[2] == "nan");
    CHECK(cells[3] == "0");
    CHECK(cells[4] == "no measurements");
}

TEST_CASE("cli baseline writes a winner report and sweep orders rates ascending", "[cli]") {
    TempDir dir("sweep");
    write_text(dir.file("run.cfg"), "[phantom]\nsize = 8\nframes = 2\ncount = 3\nseed = 7\n"
                                    "[baseline]\nmethod = coherence-vd\nrate = 0.5\nseed = 1\ndraws = 4\n"
                                    "size = 8\nframes = 2\ncentrals = 0, 1\n"
                                    "[sweep]\nmode = methods\nmethods = uniform-random\n"
                                    "rates = 0.5, 0.25\nseeds = 1, 2\n"
                                    "decoder = zf\ntest = phantom_001.vol, phantom_002.vol\n");
    const std::string cfg = " --config " + dir.file("run.cfg");
    REQUIRE(run("phantom" + cfg + " --out " + dir.path.string() + " > /dev/null") == 0);

    REQUIRE(run("baseline" + cfg + " --out " + dir.file("b") + " > /dev/null") == 0);
    auto report = read_lines(dir.file("b/report.csv"));
    REQUIRE(report.size() >= 2);
    CHECK(report[0] == "width,central,feasible,mean,std,winner");
    int winners = 0;
    for (std::size_t i = 1; i < report.size(); ++i)
        if (split_csv(report[i])[5] == "1") ++winners;
    CHECK(winners == 1);
    Mask mask = read_mask(dir.file("b/mask.txt"));
    CHECK(mask.line_count() == 8); // 50% of 16

    REQUIRE(run("sweep" + cfg + " --out " + dir.file("s") + " > /dev/null") == 0);
    auto rows = read_lines(dir.file("s/sweep.csv"));
    REQUIRE(rows.size() == 3); // header + 2 rates for the single method
    CHECK(rows[0] == "method,rate,metric,value");
    CHECK(split_csv(rows[1])[1] == "0.25"); // ascending despite config order
    CHECK(split_csv(rows[2])[1] == "0.5");
}

TEST_CASE("cli seed and metric overrides take effect", "[cli]") {
    TempDir dir("override");
    write_text(dir.file("run.cfg"), "[phantom]\nsize = 8\nframes = 2\ncount = 2\nseed = 4\n"
                                    "[design]\nvariant = sg\ntraining = v2\nsample_batch = 2\ntrain_batch = 1\n"
                                    "budget = 6\nseed = 1\ndecoder = zf\n"
                                    "train = phantom_000.vol, phantom_001.vol\n"
                                    "[eval]\nmask = d1/mask.txt\nvolumes = phantom_000.vol\ndecoder = zf\n");
    const std::string cfg = " --config " + dir.file("run.cfg");
    REQUIRE(run("phantom" + cfg + " --out " + dir.path.string() + " > /dev/null") == 0);
    REQUIRE(run("design" + cfg + " --out " + dir.file("d1") + " > /dev/null") == 0);
    REQUIRE(run("design" + cfg + " --out " + dir.file("d2") + " --seed 222 > /dev/null") == 0);
    CHECK(read_text(dir.file("d1/mask.txt")) != read_text(dir.file("d2/mask.txt")));

    REQUIRE(run("eval" + cfg + " --out " + dir.file("e") + " --metric negmse > /dev/null") == 0);
    auto rows = read_lines(dir.file("e/eval.csv"));
    CHECK(split_csv(rows[1])[1] == "negmse");
    CHECK(std::stod(split_csv(rows[1])[2]) < 0.0);
}

TEST_CASE("cli reports usage and config problems with exit code 2", "[cli]") {
    TempDir dir("errors");
    CHECK(run("2> /dev/null") == 2);                         // no subcommand
    CHECK(run("frobnicate 2> /dev/null") == 2);              // unknown subcommand
    CHECK(run("design 2> /dev/null") == 2);                  // --config required
    CHECK(run("design --config " + dir.file("nope.cfg") + " 2> /dev/null") == 2);

    write_text(dir.file("bad.cfg"), "[phantom]\nsize = 8\nframes = 2\ncount = 1\n"
                                    "[design]\nvariant = g\nbudget = frog\ntrain = phantom_000.vol\n");
    REQUIRE(run("phantom --config " + dir.file("bad.cfg") + " --out " + dir.path.string() + " > /dev/null") == 0);
    CHECK(run("design --config " + dir.file("bad.cfg") + " --out " + dir.file("d") + " 2> " +
              dir.file("err.txt")) == 2);
    CHECK_THAT(read_text(dir.file("err.txt")), Catch::Matchers::ContainsSubstring("design.budget"));

    write_text(dir.file("vol.cfg"), "[design]\nvariant = g\nbudget = 2\ntrain = missing.vol\n");
    CHECK(run("design --config " + dir.file("vol.cfg") + " --out " + dir.file("d2") + " 2> /dev/null") == 2);

    write_text(dir.file("mis.cfg"), "[eval]\nmask = m.txt\nvolumes = phantom_000.vol\n");
    write_text(dir.file("m.txt"), "16 2 0\n"); // mask dims disagree with the 8x8x2 volume
    CHECK(run("eval --config " + dir.file("mis.cfg") + " --out " + dir.file("e") + " 2> " + dir.file("err2.txt")) ==
          2);
    CHECK_THAT(read_text(dir.file("err2.txt")), Catch::Matchers::ContainsSubstring("dims mismatch"));
}

TEST_CASE("cli check passes when healthy and fails under fault injection", "[cli]") {
    TempDir dir("check");
    REQUIRE(run("check > " + dir.file("r1.txt")) == 0);
    REQUIRE(run("check > " + dir.file("r2.txt")) == 0);
    CHECK(read_text(dir.file("r1.txt")) == read_text(dir.file("r2.txt")));
    CHECK_THAT(read_text(dir.file("r1.txt")), Catch::Matchers::ContainsSubstring("7/7 checks passed"));

    REQUIRE(run("check --fft-scale 1.001 > " + dir.file("f.txt")) == 1);
    CHECK_THAT(read_text(dir.file("f.txt")), Catch::Matchers::ContainsSubstring("failed: parseval"));
}
