// Line-profile sharpness metrics for comparing reconstructions. A profile is a
// straight segment inside one grid slice, sampled at unit voxel steps by
// trilinear interpolation; its sharpness is an aggregate of the absolute
// central differences.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctraj/volume.hpp"

namespace ctraj {

struct ProfileSpec {
    int axis = 0;   // slice normal: 0=x, 1=y, 2=z
    int slice = 0;  // slice index along that axis
    double a0 = 0, b0 = 0;  // segment start, in-plane voxel coords
    double a1 = 0, b1 = 0;  // segment end
    std::string name;
};

struct LineProfile {
    ProfileSpec spec;
    std::vector<double> samples;  // at unit voxel steps along the segment
};

inline LineProfile extract_profile(const VoxelField& vol, const ProfileSpec& spec) {
    if (spec.axis < 0 || spec.axis > 2) throw std::invalid_argument("profile axis must be 0..2");
    const int n[3] = {vol.geom.nx, vol.geom.ny, vol.geom.nz};
    if (spec.slice < 0 || spec.slice >= n[spec.axis])
        throw std::invalid_argument("profile slice outside the grid");

    auto to_xyz = [&](double a, double b) {
        double p[3];
        p[spec.axis] = spec.slice;
        p[(spec.axis + 1) % 3] = a;
        p[(spec.axis + 2) % 3] = b;
        return Vec3{p[0], p[1], p[2]};
    };
    Vec3 start = to_xyz(spec.a0, spec.b0);
    Vec3 end = to_xyz(spec.a1, spec.b1);
    for (const Vec3& p : {start, end})
        if (p.x < 0 || p.y < 0 || p.z < 0 || p.x > n[0] - 1 || p.y > n[1] - 1 || p.z > n[2] - 1)
            throw std::invalid_argument("profile endpoint outside the grid");

    double len = (end - start).norm();
    auto steps = static_cast<int>(std::floor(len));
    if (steps + 1 < 3) throw std::invalid_argument("profile needs at least 3 samples");
    Vec3 u = (end - start) * (1.0 / len);

    LineProfile out;
    out.spec = spec;
    out.samples.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        Vec3 p = start + u * static_cast<double>(i);
        out.samples.push_back(vol.sample(p.x, p.y, p.z));
    }
    return out;
}

enum class GradientAggregate { Mean, Max, Sum };

/// Sharpness of a profile: aggregate of |central difference| over the interior
/// samples, per unit step.
inline double gradient_magnitude(const LineProfile& profile,
                                 GradientAggregate agg = GradientAggregate::Mean) {
    const auto& s = profile.samples;
    if (s.size() < 3) throw std::invalid_argument("profile needs at least 3 samples");
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        double d = std::fabs(0.5 * (s[i + 1] - s[i - 1]));
        if (agg == GradientAggregate::Max)
            acc = std::max(acc, d);
        else
            acc += d;
    }
    if (agg == GradientAggregate::Mean) acc /= static_cast<double>(s.size() - 2);
    return acc;
}

struct ProfileComparison {
    std::string profile_name;
    std::vector<double> values;       // one per run, in input order
    std::vector<double> delta_pct;    // percentage delta vs the first run
};

/// Per-profile metric per run plus percentage deltas versus the first run.
/// All runs must share the same grid.
inline std::vector<ProfileComparison> compare_runs(std::span<const VoxelField* const> runs,
                                                   std::span<const ProfileSpec> profiles,
                                                   GradientAggregate agg = GradientAggregate::Mean) {
    if (runs.empty()) throw std::invalid_argument("compare_runs needs at least one run");
    for (const auto* r : runs)
        if (!(r->geom == runs[0]->geom))
            throw std::invalid_argument("compare_runs: mismatched grids");
    std::vector<ProfileComparison> table;
    for (const auto& spec : profiles) {
        ProfileComparison row;
        row.profile_name = spec.name.empty()
                               ? ("profile_" + std::to_string(table.size() + 1))
                               : spec.name;
        for (const auto* r : runs)
            row.values.push_back(gradient_magnitude(extract_profile(*r, spec), agg));
        for (double v : row.values) {
            double base = row.values.front();
            row.delta_pct.push_back(base == 0.0 ? 0.0 : 100.0 * (v - base) / base);
        }
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace ctraj
