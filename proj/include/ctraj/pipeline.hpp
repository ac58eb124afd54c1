// Orchestration of a full experiment. Three stages for the optimized
// strategy: a scout scan over a coarse sphere grid, score initialization
// (coarse reconstruction -> segmentation -> per-pose scores, transferred to a
// dense grid), and the optimization loop that repeatedly samples a
// low-absorption pose, measures it, and refreshes every attempted pose's
// score under the newest segmentation. Whole-sphere and random baselines
// acquire the same kind of measurements without any scoring.
//
// Measurements are simulated by projecting the ground-truth phantom at the
// requested pose (plus optional photon noise); the coarse reconstruction is
// used only for scoring, never as the measurement source.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctraj/metrics.hpp"
#include "ctraj/noise.hpp"
#include "ctraj/phantom.hpp"
#include "ctraj/recon.hpp"
#include "ctraj/robot_model.hpp"
#include "ctraj/sampler.hpp"
#include "ctraj/scoring.hpp"
#include "ctraj/segmentation.hpp"

namespace ctraj {

enum class Strategy { Optimized, WholeSphere, Random };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::Optimized: return "optimized";
        case Strategy::WholeSphere: return "whole-sphere";
        case Strategy::Random: return "random";
    }
    return "?";
}

struct ExperimentConfig {
    PhantomSpec phantom = default_phantom_spec(1);
    DetectorSpec detector;

    int n_side_low = 3;
    int n_side_high = 18;
    int baseline_n_side = 5;  // whole-sphere baseline grid
    int random_n_side = 19;   // dense grid the random baseline draws from

    double r_deg = 5.0;       // neighborhood spread radius, degrees
    SamplerConfig sampler;    // penalty s and score clamp
    bool spread_all_poses = false;
    int budget = 150;         // pose attempts in the optimization loop

    int coarse_grid = 48;     // intermediate reconstruction resolution
    int coarse_iterations = 10;
    int final_grid = 96;
    int final_iterations = 30;
    double lambda = -1.0;     // < 0: auto

    SegmentationConfig segmentation;
    ReachabilitySpec reachability = default_reachability();
    NoiseModel noise;

    std::uint64_t seed = 1;
    int threads = 0;
    int random_target = -1;  // acquired-image target for the random baseline

    std::vector<ProfileSpec> profiles;  // metrics stage defaults
    GradientAggregate metrics_aggregate = GradientAggregate::Mean;

    void validate() const {
        detector.validate();
        sampler.validate();
        segmentation.validate();
        reachability.validate();
        noise.validate();
        if (n_side_low < 1 || n_side_high <= n_side_low)
            throw std::invalid_argument("need n_side_high > n_side_low >= 1");
        if (budget < 1) throw std::invalid_argument("budget must be >= 1");
        if (coarse_grid < 8 || final_grid < 8) throw std::invalid_argument("grid too small");
        if (r_deg < 0 || r_deg > 180) throw std::invalid_argument("r_deg must be in [0, 180]");
    }

    VolumeGeometry coarse_geometry() const {
        return {coarse_grid, coarse_grid, coarse_grid, phantom.world_mm / coarse_grid};
    }
    VolumeGeometry final_geometry() const {
        return {final_grid, final_grid, final_grid, phantom.world_mm / final_grid};
    }
};

enum class Stage : char { Scout = 'S', Loop = 'O', Baseline = 'B' };

struct AttemptRecord {
    int iteration = 0;  // 1-based within the stage
    Stage stage = Stage::Scout;
    int n_side = 0;
    std::uint32_t pixel_id = 0;
    double theta = 0, phi = 0;
    AcquisitionOutcome outcome = AcquisitionOutcome::Ok;
    std::int64_t score_at_selection = -1;  // -1 = undefined
};

struct AcquiredView {
    ConeBeamPose pose;
    Stage stage = Stage::Scout;
    int n_side = 0;
    std::uint32_t pixel_id = 0;
};

struct ScoreLogRow {
    int iteration = 0;
    std::uint32_t pixel_id = 0;
    std::int64_t score = -1;  // -1 for failed attempts
    std::size_t updated_neighbors = 0;
};

struct TrajectoryRun {
    Strategy strategy = Strategy::Optimized;
    std::uint64_t seed = 0;
    std::vector<AttemptRecord> records;
    std::vector<AcquiredView> acquired;
    Sinogram pool;  // one view per acquired entry, same order

    std::optional<SphereScoreMap> low_map;
    std::optional<SphereScoreMap> high_map;
    std::vector<ScoreLogRow> score_log;

    VoxelField final_segmentation;  // empty for baselines
    SegmentationLog final_seg_log{};
    bool has_segmentation = false;

    VoxelField final_recon;
    std::vector<double> final_residuals;
    double final_lambda = 0.0;

    std::string termination = "completed";  // or "exhausted"
    double seconds_scout = 0, seconds_init = 0, seconds_loop = 0, seconds_final = 0;

    std::size_t ok_count() const {
        std::size_t n = 0;
        for (const auto& r : records)
            if (r.outcome == AcquisitionOutcome::Ok) ++n;
        return n;
    }
    std::vector<ConeBeamPose> acquired_poses() const {
        std::vector<ConeBeamPose> p;
        p.reserve(acquired.size());
        for (const auto& a : acquired) p.push_back(a.pose);
        return p;
    }
};

/// Hooks for optional per-iteration output (verbose probability dumps).
struct RunHooks {
    std::function<void(int iteration, const std::vector<double>& weights)> on_weights;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Sinogram simulate_measurement(const MaterialVolume& truth, const ConeBeamPose& pose,
                                     const ExperimentConfig& cfg, Rng& rng) {
    Sinogram s = forward_project(truth.mu, std::span<const ConeBeamPose>(&pose, 1), cfg.detector,
                                 cfg.threads);
    apply_photon_noise(s, cfg.noise, rng);
    return s;
}

}  // namespace detail

struct ScoutResult {
    SphereScoreMap low_map;
    Sinogram pool;
    std::vector<AcquiredView> acquired;
    std::vector<AttemptRecord> records;
};

/// Stage I: attempt every pixel of the coarse grid in index order.
inline ScoutResult scout_scan(const ExperimentConfig& cfg, const MaterialVolume& truth,
                              Rng& rng) {
    SpherePartition low(cfg.n_side_low);
    ScoutResult out{SphereScoreMap(low), Sinogram(0, cfg.detector.rows, cfg.detector.cols), {}, {}};
    for (PixelId id = 0; id < low.n_pix(); ++id) {
        ConeBeamPose pose = pose_from_pixel(low, id);
        AcquisitionOutcome outcome = attempt_acquisition(cfg.reachability, pose, rng);
        auto c = low.pixel_center(id);
        out.records.push_back({static_cast<int>(id) + 1, Stage::Scout, cfg.n_side_low, id, c.theta,
                               c.phi, outcome, -1});
        switch (outcome) {
            case AcquisitionOutcome::Ok:
                out.pool.append(detail::simulate_measurement(truth, pose, cfg, rng));
                out.acquired.push_back({pose, Stage::Scout, cfg.n_side_low, id});
                out.low_map.set_state(id, PoseState::Acquired);
                break;
            case AcquisitionOutcome::Unreachable:
                out.low_map.set_state(id, PoseState::Unreachable);
                break;
            default:
                out.low_map.set_state(id, PoseState::Failed);
                break;
        }
    }
    if (out.acquired.empty()) throw std::runtime_error("scout scan acquired zero images");
    return out;
}

struct InitState {
    SphereScoreMap high_map;
    VoxelField coarse_recon;
    VoxelField segmented;
    SegmentationLog seg_log{};
    double lambda_coarse = 0.0;   // reused (view-count scaled) by loop reconstructions
    std::size_t views_at_probe = 0;
};

/// Stage II: coarse reconstruction, segmentation, scores for every acquired
/// pose, then transfer onto the dense grid. The dense pixel containing each
/// acquired direction is marked Acquired so the loop never re-measures it.
inline InitState score_init(const ExperimentConfig& cfg, const MaterialVolume& truth,
                            ScoutResult& scout) {
    auto poses = std::vector<ConeBeamPose>();
    for (const auto& a : scout.acquired) poses.push_back(a.pose);

    ReconConfig rc;
    rc.grid = cfg.coarse_geometry();
    rc.lambda = cfg.lambda;
    rc.iterations = cfg.coarse_iterations;
    rc.threads = cfg.threads;
    ReconResult recon = reconstruct(scout.pool, poses, cfg.detector, rc);

    SegmentationLog seg_log;
    VoxelField seg =
        segment_high_absorbers(recon.volume, truth.regions, cfg.segmentation, &seg_log);

    std::vector<std::uint32_t> scores = rescore_all(seg, poses, cfg.detector, -1.0, cfg.threads);
    for (std::size_t i = 0; i < scout.acquired.size(); ++i)
        scout.low_map.set_acquired(scout.acquired[i].pixel_id, scores[i]);

    SpherePartition high(cfg.n_side_high);
    SphereScoreMap high_map = transfer_scores(scout.low_map, high);
    for (std::size_t i = 0; i < scout.acquired.size(); ++i) {
        PixelId hid = high.ang_to_pixel(scout.acquired[i].pose.direction);
        high_map.set_acquired(hid, scores[i]);
    }
    return {std::move(high_map), std::move(recon.volume), std::move(seg), seg_log,
            recon.lambda_used, poses.size()};
}

/// Stage III: the optimization loop, followed by the final reconstruction.
inline TrajectoryRun optimize_loop(const ExperimentConfig& cfg, const MaterialVolume& truth,
                                   ScoutResult scout, InitState init, Rng& rng,
                                   const RunHooks& hooks = {}) {
    TrajectoryRun run;
    run.strategy = Strategy::Optimized;
    run.seed = cfg.seed;
    run.records = std::move(scout.records);
    run.acquired = std::move(scout.acquired);
    run.pool = std::move(scout.pool);
    run.low_map = std::move(scout.low_map);
    run.high_map = std::move(init.high_map);
    run.final_segmentation = std::move(init.segmented);
    run.final_seg_log = init.seg_log;
    run.has_segmentation = true;

    SphereScoreMap& map = *run.high_map;
    const SpherePartition& high = map.partition();
    std::vector<ConeBeamPose> poses = run.acquired_poses();
    // dense pixel each acquired pose scores into (scout poses score their
    // containing dense pixel)
    std::vector<PixelId> own_pixel;
    for (const auto& a : run.acquired) own_pixel.push_back(high.ang_to_pixel(a.pose.direction));

    for (int iter = 1; iter <= cfg.budget; ++iter) {
        std::vector<double> weights = build_weights(map, cfg.sampler);
        if (!has_candidates(weights)) {
            run.termination = "exhausted";
            break;
        }
        if (hooks.on_weights) hooks.on_weights(iter, weights);
        PixelId pid = sample_next(weights, rng);
        ConeBeamPose pose = pose_from_pixel(high, pid);
        AcquisitionOutcome outcome = attempt_acquisition(cfg.reachability, pose, rng);
        auto c = high.pixel_center(pid);
        std::int64_t sel_score = map.score(pid) ? static_cast<std::int64_t>(*map.score(pid)) : -1;
        run.records.push_back(
            {iter, Stage::Loop, cfg.n_side_high, pid, c.theta, c.phi, outcome, sel_score});

        if (outcome != AcquisitionOutcome::Ok) {
            map.set_state(pid, outcome == AcquisitionOutcome::Unreachable ? PoseState::Unreachable
                                                                          : PoseState::Failed);
            run.score_log.push_back({iter, pid, -1, 0});
            continue;
        }

        run.pool.append(detail::simulate_measurement(truth, pose, cfg, rng));
        run.acquired.push_back({pose, Stage::Loop, cfg.n_side_high, pid});
        poses.push_back(pose);
        own_pixel.push_back(pid);
        map.set_acquired(pid, sel_score >= 0 ? static_cast<std::uint32_t>(sel_score) : 0);

        ReconConfig rc;
        rc.grid = cfg.coarse_geometry();
        // trace(A^T A) grows about linearly with the view count; reuse the
        // stage-II probe instead of re-probing every iteration
        rc.lambda = cfg.lambda >= 0 ? cfg.lambda
                                    : init.lambda_coarse * static_cast<double>(poses.size()) /
                                          static_cast<double>(init.views_at_probe);
        rc.iterations = cfg.coarse_iterations;
        rc.threads = cfg.threads;
        ReconResult recon = reconstruct(run.pool, poses, cfg.detector, rc);
        run.final_segmentation = segment_high_absorbers(recon.volume, truth.regions,
                                                        cfg.segmentation, &run.final_seg_log);

        std::vector<std::uint32_t> scores =
            rescore_all(run.final_segmentation, poses, cfg.detector, -1.0, cfg.threads);
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (map.state(own_pixel[i]) == PoseState::Acquired)
                map.set_acquired(own_pixel[i], scores[i]);
        }
        std::size_t updated = 0;
        if (cfg.spread_all_poses) {
            for (std::size_t i = 0; i < poses.size(); ++i)
                updated += spread_to_neighbors(map, own_pixel[i], scores[i], cfg.r_deg);
        } else {
            updated = spread_to_neighbors(map, pid, scores.back(), cfg.r_deg);
        }
        run.score_log.push_back(
            {iter, pid, static_cast<std::int64_t>(scores.back()), updated});
    }
    return run;
}

/// Final full-resolution reconstruction of whatever the run acquired.
inline void reconstruct_final(const ExperimentConfig& cfg, TrajectoryRun& run) {
    ReconConfig rc;
    rc.grid = cfg.final_geometry();
    rc.lambda = cfg.lambda;
    rc.iterations = cfg.final_iterations;
    rc.threads = cfg.threads;
    std::vector<ConeBeamPose> poses = run.acquired_poses();
    ReconResult res = reconstruct(run.pool, poses, cfg.detector, rc);
    run.final_recon = std::move(res.volume);
    run.final_residuals = std::move(res.residual_history);
    run.final_lambda = res.lambda_used;
}

/// Whole-sphere baseline: every reachable pixel of the baseline grid in index
/// order. Random baseline: draws without replacement from the dense grid until
/// `target` images are acquired (or candidates run out).
inline TrajectoryRun baseline_trajectory(const ExperimentConfig& cfg, const MaterialVolume& truth,
                                         Strategy kind, Rng& rng, int target = -1) {
    if (kind == Strategy::Optimized)
        throw std::invalid_argument("baseline_trajectory expects a baseline strategy");
    TrajectoryRun run;
    run.strategy = kind;
    run.seed = cfg.seed;
    run.pool = Sinogram(0, cfg.detector.rows, cfg.detector.cols);

    auto attempt = [&](const SpherePartition& grid, PixelId id, int iter) {
        ConeBeamPose pose = pose_from_pixel(grid, id);
        AcquisitionOutcome outcome = attempt_acquisition(cfg.reachability, pose, rng);
        auto c = grid.pixel_center(id);
        run.records.push_back({iter, Stage::Baseline, grid.n_side(), id, c.theta, c.phi, outcome,
                               -1});
        if (outcome == AcquisitionOutcome::Ok) {
            run.pool.append(detail::simulate_measurement(truth, pose, cfg, rng));
            run.acquired.push_back({pose, Stage::Baseline, grid.n_side(), id});
        }
        return outcome;
    };

    if (kind == Strategy::WholeSphere) {
        SpherePartition grid(cfg.baseline_n_side);
        for (PixelId id = 0; id < grid.n_pix(); ++id)
            attempt(grid, id, static_cast<int>(id) + 1);
    } else {
        if (target <= 0) target = cfg.random_target;
        if (target <= 0)
            throw std::invalid_argument("random baseline needs a positive acquired-image target");
        SpherePartition grid(cfg.random_n_side);
        std::vector<PixelId> candidates(grid.n_pix());
        for (std::uint32_t i = 0; i < grid.n_pix(); ++i) candidates[i] = i;
        int iter = 0;
        while (static_cast<int>(run.acquired.size()) < target && !candidates.empty()) {
            auto pick = static_cast<std::size_t>(rng.uniform() * candidates.size());
            if (pick >= candidates.size()) pick = candidates.size() - 1;
            PixelId id = candidates[pick];
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
            attempt(grid, id, ++iter);
        }
        if (static_cast<int>(run.acquired.size()) < target) run.termination = "exhausted";
    }
    if (run.acquired.empty()) throw std::runtime_error("baseline acquired zero images");
    return run;
}

/// Runs a full experiment for one strategy, including the final reconstruction.
inline TrajectoryRun run_experiment(const ExperimentConfig& cfg, Strategy strategy,
                                    const RunHooks& hooks = {}) {
    cfg.validate();
    MaterialVolume truth = build_phantom(cfg.phantom);
    Rng rng(cfg.seed);
    auto t0 = std::chrono::steady_clock::now();

    TrajectoryRun run;
    if (strategy == Strategy::Optimized) {
        ScoutResult scout = scout_scan(cfg, truth, rng);
        double t_scout = detail::seconds_since(t0);
        InitState init = score_init(cfg, truth, scout);
        double t_init = detail::seconds_since(t0);
        run = optimize_loop(cfg, truth, std::move(scout), std::move(init), rng, hooks);
        run.seconds_scout = t_scout;
        run.seconds_init = t_init - t_scout;
        run.seconds_loop = detail::seconds_since(t0) - t_init;
    } else {
        run = baseline_trajectory(cfg, truth, strategy, rng);
        run.seconds_loop = detail::seconds_since(t0);
    }
    double t_pre = detail::seconds_since(t0);
    reconstruct_final(cfg, run);
    run.seconds_final = detail::seconds_since(t0) - t_pre;
    return run;
}

}  // namespace ctraj
