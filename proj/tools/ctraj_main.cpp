// ctraj command line: build phantoms, run trajectory experiments, compare
// reconstructions. Exit codes: 0 success, 2 usage/config error, 3 runtime
// exhaustion or failure.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctraj/config.hpp"
#include "ctraj/metrics.hpp"
#include "ctraj/phantom.hpp"
#include "ctraj/pipeline.hpp"
#include "ctraj/run_io.hpp"

namespace fs = std::filesystem;
using namespace ctraj;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int cmd_phantom(int sample, int grid, const std::string& out_dir) {
    PhantomSpec spec = default_phantom_spec(sample, grid);
    MaterialVolume vol = build_phantom(spec);
    fs::create_directories(out_dir);
    std::string stem = (fs::path(out_dir) / ("sample" + std::to_string(sample))).string();
    io::save_volume(stem, vol);
    std::cout << "wrote " << stem << ".raw (" << grid << "^3, spacing " << spec.spacing()
              << " mm), labels and metadata\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& strategy_name,
            std::uint64_t seed_override, bool has_seed, const std::string& out_dir,
            const std::string& match_dir, int threads, bool verbose,
            const std::vector<std::string>& argv) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (has_seed) cfg.seed = seed_override;
    if (threads >= 0) cfg.threads = threads;

    Strategy strategy;
    if (strategy_name == "optimized") strategy = Strategy::Optimized;
    else if (strategy_name == "whole-sphere") strategy = Strategy::WholeSphere;
    else if (strategy_name == "random") strategy = Strategy::Random;
    else throw CLI::ValidationError("--strategy", "must be optimized, whole-sphere or random");

    if (strategy == Strategy::Random && !match_dir.empty()) {
        std::ifstream is(fs::path(match_dir) / "manifest.json");
        if (!is) throw std::runtime_error("cannot read manifest in " + match_dir);
        nlohmann::json m = nlohmann::json::parse(is);
        cfg.random_target = m["acquired_images"].get<int>();
    }

    fs::create_directories(out_dir);
    RunHooks hooks;
    if (verbose && strategy == Strategy::Optimized) {
        hooks.on_weights = [&](int iter, const std::vector<double>& w) {
            char name[64];
            std::snprintf(name, sizeof name, "probs_iter%04d.csv", iter);
            std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
            io::write_weights_csv(os, w);
        };
    }

    TrajectoryRun run = run_experiment(cfg, strategy, hooks);
    std::string manifest = io::write_run_directory(out_dir, cfg, run, argv);
    std::cout << to_string(strategy) << " run: " << run.acquired.size() << " images from "
              << run.records.size() << " attempts, termination=" << run.termination << "\n"
              << "manifest: " << manifest << "\n";
    return run.termination == "exhausted" ? kExitRuntime : kExitOk;
}

int cmd_metrics(const std::vector<std::string>& run_dirs, const std::string& profiles_path,
                const std::string& out_dir) {
    std::vector<MaterialVolume> volumes;
    std::vector<std::string> names;
    for (const auto& dir : run_dirs) {
        if (!fs::exists(fs::path(dir) / "final_recon.json"))
            throw std::runtime_error("no final_recon in run directory: " + dir);
        volumes.push_back(io::load_volume((fs::path(dir) / "final_recon").string()));
        names.push_back(fs::path(dir).filename().string());
    }
    ExperimentConfig pcfg = load_experiment_config(profiles_path);
    if (pcfg.profiles.empty()) throw std::runtime_error("profiles file defines no profiles");

    std::vector<const VoxelField*> fields;
    for (const auto& v : volumes) fields.push_back(&v.mu);
    auto table = compare_runs(fields, pcfg.profiles, pcfg.metrics_aggregate);

    std::ostringstream csv, txt;
    io::write_metrics_report(csv, txt, table, names);
    std::cout << txt.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream co(fs::path(out_dir) / "metrics.csv", std::ios::binary);
        co << csv.str();
        std::ofstream to(fs::path(out_dir) / "metrics.txt", std::ios::binary);
        to << txt.str();
        // per-profile sample dumps for plotting
        for (const auto& spec : pcfg.profiles) {
            for (std::size_t r = 0; r < volumes.size(); ++r) {
                LineProfile p = extract_profile(volumes[r].mu, spec);
                std::ofstream po(fs::path(out_dir) /
                                     (spec.name + "_" + names[r] + ".csv"),
                                 std::ios::binary);
                po << "t,value\n";
                for (std::size_t i = 0; i < p.samples.size(); ++i)
                    po << i << ',' << format_double(p.samples[i]) << '\n';
            }
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cone-beam CT trajectory planning and reconstruction experiments"};
    app.require_subcommand(1);

    auto* ph = app.add_subcommand("phantom", "voxelize a sample and write volume+labels+metadata");
    int ph_sample = 1, ph_grid = 96;
    std::string ph_out = "phantom_out";
    ph->add_option("--sample", ph_sample, "sample id (1 or 2)")->required();
    ph->add_option("--grid", ph_grid, "voxels per axis");
    ph->add_option("--out", ph_out, "output directory")->required();

    auto* run = app.add_subcommand("run", "execute a trajectory experiment");
    std::string run_config, run_strategy = "optimized", run_out = "run_out", run_match;
    std::uint64_t run_seed = 0;
    int run_threads = -1;
    bool run_verbose = false;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--strategy", run_strategy, "optimized | whole-sphere | random");
    auto* seed_opt = run->add_option("--seed", run_seed, "RNG seed override");
    run->add_option("--out", run_out, "run output directory")->required();
    run->add_option("--match", run_match,
                    "run directory whose acquired-image count the random baseline matches");
    run->add_option("--threads", run_threads, "internal parallelism cap (0 = hardware)");
    run->add_flag("--verbose", run_verbose, "dump per-iteration probability vectors");

    auto* met = app.add_subcommand("metrics", "compare reconstructions along line profiles");
    std::vector<std::string> met_runs;
    std::string met_profiles, met_out;
    met->add_option("--runs", met_runs, "run directories (first is the baseline)")
        ->required()
        ->expected(-1);
    met->add_option("--profiles", met_profiles, "config file with a [profiles] section")
        ->required();
    met->add_option("--out", met_out, "directory for metrics.csv/metrics.txt and profile dumps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::vector<std::string> argv_copy(argv, argv + argc);
    try {
        if (ph->parsed()) return cmd_phantom(ph_sample, ph_grid, ph_out);
        if (run->parsed())
            return cmd_run(run_config, run_strategy, run_seed, !seed_opt->empty(), run_out,
                           run_match, run_threads, run_verbose, argv_copy);
        if (met->parsed()) return cmd_metrics(met_runs, met_profiles, met_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        // config/file problems are usage errors; anything mid-run is runtime
        std::string msg = e.what();
        if (msg.find("cannot open") != std::string::npos ||
            msg.find("config") != std::string::npos || msg.find("bad ") != std::string::npos ||
            msg.find("manifest") != std::string::npos ||
            msg.find("no final_recon") != std::string::npos ||
            msg.find("profiles") != std::string::npos)
            return kExitUsage;
        return kExitRuntime;
    }
    return kExitUsage;
}
