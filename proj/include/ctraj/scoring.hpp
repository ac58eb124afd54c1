// Absorption scores. A pose's score is the L0 norm of the forward projection
// of the segmented (absorber-only) volume: the number of detector pixels that
// see any absorber from that angle. Batched rescoring runs one forward
// projection over all attempted poses; neighborhood spreading copies the
// newest score onto untried pixels within an angular radius.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctraj/projector.hpp"
#include "ctraj/score_map.hpp"

namespace ctraj {

namespace detail {

/// Scale-free zero test: a strict > 0 would count interpolation dust.
inline double auto_epsilon(const Sinogram& sino, double eps) {
    if (eps >= 0.0) return eps;
    float mx = 0.0f;
    for (float v : sino.data) mx = std::max(mx, v);
    return 1e-9 * (mx > 0.0f ? static_cast<double>(mx) : 1.0);
}

inline std::uint32_t l0_norm(const float* slice, std::size_t n, double eps) {
    std::uint32_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (slice[i] > eps) ++count;
    return count;
}

}  // namespace detail

/// L0 scores for a batch of poses from a single batched forward projection.
/// eps < 0 selects the automatic scale-relative epsilon over the whole batch.
inline std::vector<std::uint32_t> rescore_all(const VoxelField& segmented,
                                              std::span<const ConeBeamPose> poses,
                                              const DetectorSpec& det, double eps = -1.0,
                                              int threads = 0) {
    if (poses.empty()) throw std::invalid_argument("rescore_all needs at least one pose");
    Sinogram sino = forward_project(segmented, poses, det, threads);
    double e = detail::auto_epsilon(sino, eps);
    std::vector<std::uint32_t> scores(poses.size());
    for (std::size_t v = 0; v < poses.size(); ++v)
        scores[v] = detail::l0_norm(sino.view(static_cast<int>(v)), sino.view_size(), e);
    return scores;
}

inline std::uint32_t absorption_score(const VoxelField& segmented, const ConeBeamPose& pose,
                                      const DetectorSpec& det, double eps = -1.0,
                                      int threads = 0) {
    return rescore_all(segmented, std::span<const ConeBeamPose>(&pose, 1), det, eps, threads)[0];
}

/// Copies `score` onto every *Untried* pixel within `r_deg` of the given
/// pixel's center. Acquired/Unreachable/Failed pixels keep their state and
/// score. Returns the number of pixels updated.
inline std::size_t spread_to_neighbors(SphereScoreMap& map, PixelId pixel, std::uint32_t score,
                                       double r_deg) {
    Vec3 center = map.partition().pixel_center_vec(pixel);
    std::size_t updated = 0;
    for (PixelId id : map.partition().query_disc(center, r_deg)) {
        if (id == pixel) continue;
        if (map.state(id) != PoseState::Untried) continue;
        map.set_score(id, score);
        ++updated;
    }
    return updated;
}

}  // namespace ctraj
