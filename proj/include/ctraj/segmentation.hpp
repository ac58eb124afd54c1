// Threshold-sweep segmentation of a coarse reconstruction. The threshold
// interval is anchored on structures that are always present: the calibration
// markers (bright) and the holder (dim). Thresholds descend from the upper
// limit until the selected voxel count is "relevant"; the surviving values are
// kept as-is and the holder region is blacked out so the markers can never be
// mistaken for sample absorbers.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctraj/volume.hpp"

namespace ctraj {

struct SegmentationConfig {
    double relevant_fraction = 5e-6;  // of total voxels
    int sweep_steps = 32;

    void validate() const {
        if (!(relevant_fraction > 0.0 && relevant_fraction < 1.0))
            throw std::invalid_argument("relevant_fraction must be in (0, 1)");
        if (sweep_steps < 2) throw std::invalid_argument("sweep_steps must be >= 2");
    }
};

struct SegmentationLog {
    double marker_value = 0;   // top-decile mean of the marker region
    double holder_value = 0;   // median of the holder region
    double upper = 0;          // interval upper limit U
    double lower_q1 = 0;       // effective lower limit, first quartile of [L, U]
    double threshold = 0;      // chosen threshold
    std::size_t voxel_count = 0;
};

namespace detail {

struct VoxelRange {
    int i0, i1, j0, j1, k0, k1;  // half-open
    bool empty() const { return i0 >= i1 || j0 >= j1 || k0 >= k1; }
};

inline VoxelRange clip_box(const VolumeGeometry& g, const Aabb& box) {
    Vec3 lo = g.world_to_voxel(box.lo);
    Vec3 hi = g.world_to_voxel(box.hi);
    auto clampi = [](double v, int n) { return std::clamp(static_cast<int>(std::ceil(v)), 0, n); };
    auto clampe = [](double v, int n) {
        return std::clamp(static_cast<int>(std::floor(v)) + 1, 0, n);
    };
    return {clampi(lo.x, g.nx), clampe(hi.x, g.nx), clampi(lo.y, g.ny),
            clampe(hi.y, g.ny), clampi(lo.z, g.nz), clampe(hi.z, g.nz)};
}

inline std::vector<float> collect(const VoxelField& f, const VoxelRange& r) {
    std::vector<float> vals;
    for (int k = r.k0; k < r.k1; ++k)
        for (int j = r.j0; j < r.j1; ++j)
            for (int i = r.i0; i < r.i1; ++i) vals.push_back(f.at(i, j, k));
    return vals;
}

inline double top_decile_mean(std::vector<float> vals) {
    if (vals.empty()) throw std::invalid_argument("empty region");
    std::size_t n = std::max<std::size_t>(1, vals.size() / 10);
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(n - 1), vals.end(),
                     std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += vals[i];
    return s / static_cast<double>(n);
}

inline double median(std::vector<float> vals) {
    if (vals.empty()) throw std::invalid_argument("empty region");
    auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
    std::nth_element(vals.begin(), mid, vals.end());
    return *mid;
}

}  // namespace detail

inline VoxelField segment_high_absorbers(const VoxelField& recon, const RegionBoxes& regions,
                                         const SegmentationConfig& cfg,
                                         SegmentationLog* log = nullptr) {
    cfg.validate();
    if (!regions.has_holder)
        throw std::invalid_argument("segmentation needs holder/marker region metadata");
    for (float v : recon.data)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite reconstruction value");

    const VolumeGeometry& g = recon.geom;
    auto marker_r = detail::clip_box(g, regions.markers);
    auto holder_r = detail::clip_box(g, regions.holder);
    auto sample_r = detail::clip_box(g, regions.sample);
    if (marker_r.empty() || holder_r.empty() || sample_r.empty())
        throw std::invalid_argument("region boxes do not intersect the grid");

    double marker_value = detail::top_decile_mean(detail::collect(recon, marker_r));
    auto sample_vals = detail::collect(recon, sample_r);
    double sample_max = *std::max_element(sample_vals.begin(), sample_vals.end());
    double upper = std::max(marker_value, sample_max);
    double holder_value = detail::median(detail::collect(recon, holder_r));
    double q1 = holder_value + 0.25 * (upper - holder_value);
    if (q1 > upper) q1 = upper;  // degenerate: holder brighter than everything

    const auto total = static_cast<double>(g.size());
    const auto relevant = static_cast<std::size_t>(std::ceil(cfg.relevant_fraction * total));

    auto count_above = [&](double t) {
        std::size_t n = 0;
        for (float v : recon.data)
            if (v > t) ++n;
        return n;
    };

    double threshold = q1;
    std::size_t count = 0;
    for (int s = 0; s < cfg.sweep_steps; ++s) {
        double t = upper - (upper - q1) * s / (cfg.sweep_steps - 1);
        count = count_above(t);
        threshold = t;
        if (count >= relevant) break;
    }

    VoxelField out(g);
    for (std::size_t i = 0; i < recon.data.size(); ++i)
        out.data[i] = recon.data[i] > threshold ? recon.data[i] : 0.0f;
    // holder blackout: the markers live here and must not look like absorbers
    for (int k = holder_r.k0; k < holder_r.k1; ++k)
        for (int j = holder_r.j0; j < holder_r.j1; ++j)
            for (int i = holder_r.i0; i < holder_r.i1; ++i) out.at(i, j, k) = 0.0f;

    if (log) {
        std::size_t nz = 0;
        for (float v : out.data)
            if (v != 0.0f) ++nz;
        *log = {marker_value, holder_value, upper, q1, threshold, nz};
    }
    return out;
}

}  // namespace ctraj
