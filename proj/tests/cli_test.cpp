#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctraj/config.hpp"

using namespace ctraj;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(CTRAJ_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_tiny_config(const fs::path& dir) {
    ExperimentConfig cfg;
    cfg.phantom = default_phantom_spec(1, 32);
    cfg.detector.rows = 24;
    cfg.detector.cols = 24;
    cfg.detector.pixel_pitch = 18.0;
    cfg.n_side_low = 1;
    cfg.n_side_high = 3;
    cfg.baseline_n_side = 2;
    cfg.random_n_side = 4;
    cfg.budget = 4;
    cfg.coarse_grid = 16;
    cfg.coarse_iterations = 2;
    cfg.final_grid = 24;
    cfg.final_iterations = 3;
    cfg.segmentation.relevant_fraction = 2e-3;
    cfg.reachability.unreachable_caps.clear();
    cfg.noise.enabled = false;
    cfg.seed = 5;
    cfg.threads = 1;
    cfg.profiles = {{0, 12, 11.5, 4.5, 11.5, 19.5, "t1"}};
    fs::path path = dir / "tiny.cfg";
    std::ofstream os(path, std::ios::binary);
    os << serialize_config(cfg);
    return path;
}

}  // namespace

TEST_CASE("cli: phantom command writes deterministic artifacts") {
    fs::path dir = fs::temp_directory_path() / "ctraj_cli_phantom";
    fs::remove_all(dir);
    CHECK(run_cli("phantom --sample 1 --grid 32 --out " + (dir / "a").string()) == 0);
    for (const char* f : {"sample1.raw", "sample1.labels.raw", "sample1.json"})
        CHECK(fs::exists(dir / "a" / f));

    CHECK(run_cli("phantom --sample 1 --grid 32 --out " + (dir / "b").string()) == 0);
    CHECK(read_file(dir / "a" / "sample1.raw") == read_file(dir / "b" / "sample1.raw"));
    CHECK(read_file(dir / "a" / "sample1.json") == read_file(dir / "b" / "sample1.json"));

    CHECK(run_cli("phantom --sample 3 --grid 32 --out " + (dir / "c").string()) == 2);
    CHECK(run_cli("phantom --grid 32") == 2);  // missing required options
    fs::remove_all(dir);
}

TEST_CASE("cli: run + metrics round trip on a tiny experiment") {
    fs::path dir = fs::temp_directory_path() / "ctraj_cli_run";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path cfg = write_tiny_config(dir);

    std::string base = "run --config " + cfg.string();
    CHECK(run_cli(base + " --strategy optimized --out " + (dir / "opt").string()) == 0);
    CHECK(fs::exists(dir / "opt" / "manifest.json"));
    CHECK(fs::exists(dir / "opt" / "trajectory.csv"));

    // same seed twice -> identical trajectory bytes
    CHECK(run_cli(base + " --strategy optimized --out " + (dir / "opt2").string()) == 0);
    CHECK(read_file(dir / "opt" / "trajectory.csv") == read_file(dir / "opt2" / "trajectory.csv"));
    CHECK(read_file(dir / "opt" / "score_log.csv") == read_file(dir / "opt2" / "score_log.csv"));

    CHECK(run_cli(base + " --strategy whole-sphere --out " + (dir / "ws").string()) == 0);
    CHECK(run_cli(base + " --strategy random --match " + (dir / "opt").string() + " --out " +
                  (dir / "rnd").string()) == 0);

    // acquired-image counts match via --match
    {
        std::ifstream mo(dir / "opt" / "manifest.json");
        nlohmann::json jo = nlohmann::json::parse(mo);
        std::ifstream mr(dir / "rnd" / "manifest.json");
        nlohmann::json jr = nlohmann::json::parse(mr);
        CHECK(jo["acquired_images"] == jr["acquired_images"]);
    }

    std::string runs = (dir / "opt").string() + " " + (dir / "ws").string() + " " +
                       (dir / "rnd").string();
    CHECK(run_cli("metrics --runs " + runs + " --profiles " + cfg.string() + " --out " +
                  (dir / "metrics").string()) == 0);
    CHECK(fs::exists(dir / "metrics" / "metrics.csv"));
    CHECK(fs::exists(dir / "metrics" / "metrics.txt"));

    // single run -> a table with zero deltas
    CHECK(run_cli("metrics --runs " + (dir / "opt").string() + " --profiles " + cfg.string()) ==
          0);

    // missing run directory -> usage error
    CHECK(run_cli("metrics --runs " + (dir / "nope").string() + " --profiles " + cfg.string()) ==
          2);
    // bad config -> usage error
    CHECK(run_cli("run --config /nonexistent.cfg --strategy optimized --out " +
                  (dir / "x").string()) == 2);
    // unknown strategy -> usage error
    CHECK(run_cli(base + " --strategy sideways --out " + (dir / "y").string()) == 2);
    fs::remove_all(dir);
}
