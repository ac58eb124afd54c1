// Run-directory output: trajectory and score-log CSVs, score maps, the pooled
// sinogram, final volumes, residual history and a JSON manifest that records
// the config snapshot, seed, artifact paths, wall-clock per stage and the
// command line -- enough to reconstruct the invocation that produced it.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctraj/config.hpp"
#include "ctraj/pipeline.hpp"

namespace ctraj::io {

inline constexpr const char* kVersion = "0.1.0";

inline void write_trajectory_csv(std::ostream& os, const TrajectoryRun& run) {
    os << "iteration,stage,n_side,pixel_id,theta_rad,phi_rad,outcome,score_at_selection\n";
    for (const auto& r : run.records) {
        os << r.iteration << ',' << static_cast<char>(r.stage) << ',' << r.n_side << ','
           << r.pixel_id << ',' << format_double(r.theta) << ',' << format_double(r.phi) << ','
           << to_string(r.outcome) << ',';
        if (r.score_at_selection >= 0) os << r.score_at_selection;
        os << '\n';
    }
}

inline void write_score_log_csv(std::ostream& os, const TrajectoryRun& run) {
    os << "iter,pixel_id,score,updated_neighbors\n";
    for (const auto& r : run.score_log) {
        os << r.iteration << ',' << r.pixel_id << ',';
        if (r.score >= 0) os << r.score;
        os << ',' << r.updated_neighbors << '\n';
    }
}

inline std::string trajectory_csv_string(const TrajectoryRun& run) {
    std::ostringstream os;
    write_trajectory_csv(os, run);
    return os.str();
}

inline std::string score_log_csv_string(const TrajectoryRun& run) {
    std::ostringstream os;
    write_score_log_csv(os, run);
    return os.str();
}

inline void write_residuals_csv(std::ostream& os, const std::vector<double>& residuals) {
    os << "iter,residual_norm\n";
    for (std::size_t i = 0; i < residuals.size(); ++i)
        os << i << ',' << format_double(residuals[i]) << '\n';
}

inline void write_weights_csv(std::ostream& os, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    os << "pixel_id,weight,prob\n";
    for (std::size_t i = 0; i < weights.size(); ++i)
        os << i << ',' << format_double(weights[i]) << ','
           << format_double(total > 0 ? weights[i] / total : 0.0) << '\n';
}

/// Writes all artifacts of a finished run under `dir` and returns the
/// manifest path.
inline std::string write_run_directory(const std::filesystem::path& dir,
                                       const ExperimentConfig& cfg, const TrajectoryRun& run,
                                       const std::vector<std::string>& argv = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["strategy"] = to_string(run.strategy);
    manifest["seed"] = run.seed;
    manifest["termination"] = run.termination;
    manifest["acquired_images"] = run.acquired.size();
    manifest["attempts"] = run.records.size();
    manifest["config"] = serialize_config(cfg);
    if (!argv.empty()) manifest["argv"] = argv;
    manifest["stage_seconds"] = {{"scout", run.seconds_scout},
                                 {"score_init", run.seconds_init},
                                 {"loop", run.seconds_loop},
                                 {"final_recon", run.seconds_final}};

    auto artifact = [&](const char* key, const std::string& name) {
        manifest["artifacts"][key] = name;
        return (dir / name).string();
    };

    {
        std::ofstream os(artifact("config", "config.txt"), std::ios::binary);
        os << serialize_config(cfg);
    }
    {
        std::ofstream os(artifact("trajectory", "trajectory.csv"), std::ios::binary);
        write_trajectory_csv(os, run);
    }
    if (!run.score_log.empty() || run.strategy == Strategy::Optimized) {
        std::ofstream os(artifact("score_log", "score_log.csv"), std::ios::binary);
        write_score_log_csv(os, run);
    }
    if (run.low_map) run.low_map->save_csv(artifact("score_map_low", "score_map_low.csv"));
    if (run.high_map) run.high_map->save_csv(artifact("score_map_high", "score_map_high.csv"));
    {
        std::ofstream os(artifact("residuals", "residuals.csv"), std::ios::binary);
        write_residuals_csv(os, run.final_residuals);
    }
    auto poses = run.acquired_poses();
    save_sinogram((dir / "pool").string(), run.pool, poses, cfg.detector);
    manifest["artifacts"]["pool"] = "pool.raw";
    save_volume((dir / "final_recon").string(), run.final_recon);
    manifest["artifacts"]["final_recon"] = "final_recon.raw";
    if (run.has_segmentation) {
        save_volume((dir / "final_segmentation").string(), run.final_segmentation);
        manifest["artifacts"]["final_segmentation"] = "final_segmentation.raw";
        manifest["segmentation"] = {{"marker_value", run.final_seg_log.marker_value},
                                    {"holder_value", run.final_seg_log.holder_value},
                                    {"upper", run.final_seg_log.upper},
                                    {"lower_q1", run.final_seg_log.lower_q1},
                                    {"threshold", run.final_seg_log.threshold},
                                    {"voxel_count", run.final_seg_log.voxel_count}};
    }
    manifest["final_lambda"] = run.final_lambda;

    std::string manifest_path = (dir / "manifest.json").string();
    std::ofstream os(manifest_path, std::ios::binary);
    os << manifest.dump(2) << '\n';
    return manifest_path;
}

inline void write_metrics_report(std::ostream& csv, std::ostream& txt,
                                 const std::vector<ProfileComparison>& table,
                                 const std::vector<std::string>& run_names) {
    csv << "profile";
    for (const auto& n : run_names) csv << ',' << n << ',' << n << "_delta_pct";
    csv << '\n';
    for (const auto& row : table) {
        csv << row.profile_name;
        for (std::size_t i = 0; i < row.values.size(); ++i)
            csv << ',' << format_double(row.values[i]) << ',' << format_double(row.delta_pct[i]);
        csv << '\n';
    }

    txt << "Gradient-magnitude sharpness per line profile\n";
    txt << "(percentage delta is relative to the first run)\n\n";
    for (const auto& row : table) {
        txt << row.profile_name << ":\n";
        for (std::size_t i = 0; i < row.values.size(); ++i) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "  %-24s %.6f  (%+.1f %%)\n", run_names[i].c_str(),
                          row.values[i], row.delta_pct[i]);
            txt << buf;
        }
    }
}

}  // namespace ctraj::io
