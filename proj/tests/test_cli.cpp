#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "openturb/csv.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;  // path to the openturb binary, from argv

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() /
               ("openturb-cli-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
    int code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
    static int counter = 0;
    const fs::path log =
        fs::temp_directory_path() /
        ("openturb-cli-log-" + std::to_string(::getpid()) + "-" +
         std::to_string(counter++));
    const std::string cmd =
        "'" + g_cli + "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (status >= 0 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.output = openturb::read_text_file(log);
    fs::remove(log);
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// classification column of the first data row of a regimes.csv
std::string first_classification(const fs::path& regimes) {
    const std::string text = openturb::read_text_file(regimes);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);
    return line.substr(line.rfind(',') + 1);
}

}  // namespace

TEST_CASE("help names every subcommand") {
    const auto r = run("--help");
    CHECK(r.code == 0);
    for (const char* word :
         {"simulate", "fpe", "oracle-table", "analyze", "check"})
        CHECK(r.output.find(word) != std::string::npos);
}

TEST_CASE("simulate: outputs, determinism, manifest reproduction") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "run.cfg";
    openturb::write_text_file(cfg,
                              "epsilon = 1\n"
                              "gamma = 0.5\n"
                              "n_traj = 256\n"
                              "dt = 0.01\n"
                              "t_final = 0.5\n"
                              "n_samples = 5\n"
                              "seed = 7\n");

    const fs::path a = tmp.path / "a";
    const auto ra = run("simulate " + q(cfg) + " --out " + q(a));
    CHECK(ra.code == 0);
    CHECK(fs::exists(a / "moments.csv"));
    CHECK(fs::exists(a / "oracle.csv"));
    CHECK(fs::exists(a / "manifest.txt"));

    const auto series =
        openturb::parse_moments_csv(openturb::read_text_file(a / "moments.csv"));
    REQUIRE(series.times.size() == 5);
    CHECK(series.times.back() == 0.5);

    const std::string manifest = openturb::read_text_file(a / "manifest.txt");
    CHECK(manifest.find("# config_hash: ") != std::string::npos);
    CHECK(manifest.find("# subcommand: simulate") != std::string::npos);
    CHECK(manifest.find("seed = 7") != std::string::npos);

    // Same seed, separate output directory: byte-identical moments.
    const fs::path b = tmp.path / "b";
    const auto rb = run("simulate " + q(cfg) + " --out " + q(b));
    CHECK(rb.code == 0);
    CHECK(openturb::read_text_file(b / "moments.csv") ==
          openturb::read_text_file(a / "moments.csv"));

    // The manifest is itself a config reproducing the run byte for byte.
    const fs::path c = tmp.path / "c";
    const auto rc = run("simulate " + q(a / "manifest.txt") + " --out " + q(c));
    CHECK(rc.code == 0);
    CHECK(openturb::read_text_file(c / "moments.csv") ==
          openturb::read_text_file(a / "moments.csv"));
    CHECK(openturb::read_text_file(c / "oracle.csv") ==
          openturb::read_text_file(a / "oracle.csv"));

    // A different seed must change the numbers.
    const fs::path d = tmp.path / "d";
    const auto rd = run("simulate " + q(cfg) + " --seed 8 --out " + q(d));
    CHECK(rd.code == 0);
    CHECK(openturb::read_text_file(d / "moments.csv") !=
          openturb::read_text_file(a / "moments.csv"));
}

TEST_CASE("invalid configs exit with the config error code") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "bad.cfg";
    openturb::write_text_file(cfg, "epsilon = 1\nT = 300\ngamma = 1\n");
    const auto r = run("simulate " + q(cfg));
    CHECK(r.code == 2);
    CHECK(r.output.find("config error") != std::string::npos);
    CHECK(r.output.find("noise") != std::string::npos);

    const auto missing = run("simulate " + q(tmp.path / "absent.cfg"));
    CHECK(missing.code == 2);

    openturb::write_text_file(cfg, "epsilon = -3\n");
    CHECK(run("oracle-table " + q(cfg)).code == 2);

    // fpe_dt beyond the stability ceiling is a config error too.
    openturb::write_text_file(cfg,
                              "epsilon = 1\ngamma = 1\nx0_sq = 0.25\n"
                              "p0_sq = 0.25\nfpe_x_min = -4\nfpe_x_max = 4\n"
                              "fpe_p_min = -4\nfpe_p_max = 4\n"
                              "fpe_nx = 64\nfpe_np = 64\n"
                              "t_final = 0.05\nfpe_dt = 0.5\n");
    const auto rf = run("fpe " + q(cfg));
    CHECK(rf.code == 2);
    CHECK(rf.output.find("stability ceiling") != std::string::npos);
}

TEST_CASE("flag overrides are recorded in the manifest") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "grw.cfg";
    openturb::write_text_file(cfg,
                              "lambda = 2\nalpha = 1\ngamma = 0.5\n"
                              "n_traj = 64\ndt = 0.05\nt_final = 0.2\n"
                              "n_samples = 2\n");

    const fs::path a = tmp.path / "a";
    const auto ra = run("simulate " + q(cfg) + " --n-traj 128 --seed 9 --out " +
                        q(a));
    CHECK(ra.code == 0);
    std::string man = openturb::read_text_file(a / "manifest.txt");
    CHECK(man.find("n_traj = 128") != std::string::npos);
    CHECK(man.find("seed = 9") != std::string::npos);
    CHECK(man.find("lambda = ") != std::string::npos);
    CHECK(man.find("# derived epsilon = ") != std::string::npos);

    // --epsilon replaces the GRW pair outright.
    const fs::path b = tmp.path / "b";
    const auto rb =
        run("simulate " + q(cfg) + " --epsilon 0.5 --out " + q(b));
    CHECK(rb.code == 0);
    man = openturb::read_text_file(b / "manifest.txt");
    CHECK(man.find("epsilon = 5.0000000000000000e-01") != std::string::npos);
    CHECK(man.find("lambda") == std::string::npos);

    // --undamped flips the effective damping of a gamma > 0 run.
    const fs::path c = tmp.path / "c";
    const auto rc = run("simulate " + q(cfg) + " --undamped --out " + q(c));
    CHECK(rc.code == 0);
    man = openturb::read_text_file(c / "manifest.txt");
    CHECK(man.find("damped = 0") != std::string::npos);
    CHECK(man.find("# effective damping: off") != std::string::npos);

    // --integrator and --dt flow through to the config.
    const fs::path d = tmp.path / "d";
    const auto rdr = run("simulate " + q(cfg) +
                         " --integrator euler_maruyama --dt 0.02 --out " + q(d));
    CHECK(rdr.code == 0);
    man = openturb::read_text_file(d / "manifest.txt");
    CHECK(man.find("integrator = euler_maruyama") != std::string::npos);
    CHECK(man.find("dt = 2.0000000000000000e-02") != std::string::npos);
}

TEST_CASE("oracle-table and analyze classify like a simulated ensemble") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "turb.cfg";
    openturb::write_text_file(cfg,
                              "epsilon = 1\n"
                              "n_traj = 4096\n"
                              "t_final = 1\n"
                              "n_samples = 40\n"
                              "seed = 3\n"
                              "windows = 0.1:1\n");

    const fs::path otab = tmp.path / "otab";
    const auto r1 = run("oracle-table " + q(cfg) + " --out " + q(otab));
    CHECK(r1.code == 0);
    REQUIRE(fs::exists(otab / "oracle.csv"));

    const fs::path oan = tmp.path / "oan";
    const auto r2 =
        run("analyze " + q(cfg) + " " + q(otab / "oracle.csv") + " --out " + q(oan));
    CHECK(r2.code == 0);
    CHECK(r2.output.find("turbulent") != std::string::npos);
    REQUIRE(fs::exists(oan / "regimes.csv"));
    CHECK(first_classification(oan / "regimes.csv") == "turbulent");
    CHECK(fs::exists(oan / "deviation.csv"));
    CHECK(fs::exists(oan / "energy.csv"));

    const fs::path sim = tmp.path / "sim";
    const auto r3 = run("simulate " + q(cfg) + " --out " + q(sim));
    CHECK(r3.code == 0);
    // The tabulated oracle is identical no matter which subcommand wrote it.
    CHECK(openturb::read_text_file(sim / "oracle.csv") ==
          openturb::read_text_file(otab / "oracle.csv"));

    const fs::path san = tmp.path / "san";
    const auto r4 =
        run("analyze " + q(cfg) + " " + q(sim / "moments.csv") + " --out " + q(san));
    CHECK(r4.code == 0);
    CHECK(first_classification(san / "regimes.csv") ==
          first_classification(oan / "regimes.csv"));

    // Exact-table deviations vanish identically.
    const std::string dev = openturb::read_text_file(oan / "deviation.csv");
    CHECK(dev.find("inf") == std::string::npos);
    CHECK(r2.output.find("max |z| = 0") != std::string::npos);

    // Analyzing a nonexistent CSV is a config error.
    CHECK(run("analyze " + q(cfg) + " " + q(tmp.path / "nope.csv")).code == 2);
}

TEST_CASE("fpe writes grid snapshots and conserves mass") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "fpe.cfg";
    openturb::write_text_file(cfg,
                              "epsilon = 1\ngamma = 1\nx0_sq = 0.25\n"
                              "p0_sq = 0.25\nfpe_x_min = -4\nfpe_x_max = 4\n"
                              "fpe_p_min = -4\nfpe_p_max = 4\n"
                              "fpe_nx = 64\nfpe_np = 64\n"
                              "t_final = 0.05\n");
    const fs::path out = tmp.path / "out";
    const auto r = run("fpe " + q(cfg) + " --out " + q(out));
    CHECK(r.code == 0);
    CHECK(r.output.find("mass deficit") != std::string::npos);

    REQUIRE(fs::exists(out / "fpe_moments.csv"));
    const auto rows = openturb::parse_moments_csv(
        openturb::read_text_file(out / "fpe_moments.csv"));
    REQUIRE(rows.times.size() >= 2);
    CHECK(rows.times.front() == 0.0);
    CHECK(rows.times.back() == doctest::Approx(0.05).epsilon(1e-12));

    std::vector<fs::path> snaps;
    for (const auto& entry : fs::directory_iterator(out))
        if (entry.path().extension() == ".otfp") snaps.push_back(entry.path());
    REQUIRE(snaps.size() == 1);
    const auto grid = openturb::read_grid_binary(snaps.front());
    CHECK(grid.geom.nx == 64);
    CHECK(grid.geom.np == 64);
    CHECK(grid.mass() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fs::exists(snaps.front().parent_path() /
                     (snaps.front().stem().string() + ".csv")));

    // snapshot_every produces the intermediate frames too.
    const fs::path out2 = tmp.path / "out2";
    const auto r2 = run("fpe " + q(cfg) + " --snapshot-every 2 --out " + q(out2));
    CHECK(r2.code == 0);
    std::size_t n_otfp = 0;
    for (const auto& entry : fs::directory_iterator(out2))
        if (entry.path().extension() == ".otfp") ++n_otfp;
    CHECK(n_otfp >= 3);  // initial, at least one interior, final
}

int main(int argc, char** argv) {
    std::vector<char*> doctest_args;
    for (int i = 0; i < argc; ++i) {
        if (i > 0 && argv[i][0] != '-' && g_cli.empty())
            g_cli = argv[i];
        else
            doctest_args.push_back(argv[i]);
    }
    if (g_cli.empty() || !fs::exists(g_cli)) {
        std::fprintf(stderr, "usage: test_cli <path-to-openturb> [doctest args]\n");
        return 1;
    }
    doctest::Context ctx(static_cast<int>(doctest_args.size()),
                         doctest_args.data());
    return ctx.run();
}
