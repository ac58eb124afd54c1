// Test samples as labeled attenuation volumes. Two scenes are provided: a
// stacked cube+cylinder pair beside a large absorber plate (sample 1) and an
// open box of small objects around a thin absorber plate (sample 2), both with
// internal holes for judging reconstruction sharpness. attach_holder adds the
// low-absorbing pedestal with highly absorbing calibration marker spheres.
#pragma once

#include <cmath>
#include <stdexcept>

#include "ctraj/volume.hpp"

namespace ctraj {

struct PhantomSpec {
    int sample_id = 1;
    int grid = 96;         // cubic voxel count per axis
    double world_mm = 96;  // physical edge length; spacing = world_mm / grid

    double mu_sample = 1.5;
    double mu_absorber = 7.0;
    double mu_holder = 0.5;
    double mu_marker = 7.0;

    double plate_gap_mm = 5.0;    // absorber offset from the sample (sample 1)
    double absorber_scale = 1.0;  // thickness scale; 0 removes the absorber

    double holder_height_mm = 8.0;
    double holder_radius_mm = 20.0;
    double marker_radius_mm = 3.2;
    double marker_ring_radius_mm = 14.0;
    int marker_count = 4;

    double spacing() const { return world_mm / grid; }
};

inline PhantomSpec default_phantom_spec(int sample_id, int grid = 96) {
    PhantomSpec s;
    s.sample_id = sample_id;
    s.grid = grid;
    if (sample_id == 1) {
        s.world_mm = 96.0;
    } else if (sample_id == 2) {
        s.world_mm = 28.8;
        s.holder_height_mm = 3.0;
        s.holder_radius_mm = 12.0;
        s.marker_radius_mm = 1.2;
        s.marker_ring_radius_mm = 11.6;
    } else {
        throw std::invalid_argument("sample_id must be 1 or 2");
    }
    return s;
}

namespace detail {

struct Box {
    Vec3 lo, hi;
    bool contains(const Vec3& p) const {
        return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y && p.z > lo.z && p.z < hi.z;
    }
};

/// z-aligned cylinder.
struct CylZ {
    double cx, cy, r, z0, z1;
    bool contains(const Vec3& p) const {
        double dx = p.x - cx, dy = p.y - cy;
        return p.z > z0 && p.z < z1 && dx * dx + dy * dy < r * r;
    }
};

/// x-aligned cylinder.
struct CylX {
    double cy, cz, r, x0, x1;
    bool contains(const Vec3& p) const {
        double dy = p.y - cy, dz = p.z - cz;
        return p.x > x0 && p.x < x1 && dy * dy + dz * dz < r * r;
    }
};

inline Aabb pad(const Aabb& b, double m) {
    return {{b.lo.x - m, b.lo.y - m, b.lo.z - m}, {b.hi.x + m, b.hi.y + m, b.hi.z + m}};
}

}  // namespace detail

/// Builds the sample solids (Sample + Absorber labels) on an air background.
/// Deterministic: same spec, same bytes.
inline MaterialVolume build_sample(const PhantomSpec& spec) {
    using detail::Box;
    using detail::CylX;
    using detail::CylZ;

    if (spec.sample_id != 1 && spec.sample_id != 2)
        throw std::invalid_argument("sample_id must be 1 or 2");
    if (spec.grid < 16) throw std::invalid_argument("grid too small");

    VolumeGeometry g{spec.grid, spec.grid, spec.grid, spec.spacing()};
    MaterialVolume vol(g);

    const double t = spec.absorber_scale;
    Aabb sample_box{};
    Box absorber{};
    bool has_absorber = t > 0.0;

    // Geometry is laid out in world mm, independent of voxel resolution.
    std::vector<Box> boxes;         // sample boxes
    std::vector<CylZ> cyls_z;       // sample z-cylinders
    std::vector<Box> hole_boxes;    // carved out of sample solids
    std::vector<CylZ> holes_z;
    std::vector<CylX> holes_x;

    if (spec.sample_id == 1) {
        const double z0 = -32.0;  // sample rests on the holder top
        // cube 22 x 18 x 30 with a 7 mm horizontal through-hole
        boxes.push_back({{-11, -9, z0}, {11, 9, z0 + 30}});
        holes_x.push_back({0.0, z0 + 15.0, 3.5, -12.0, 12.0});
        // cylinder d=32, h=30 stacked on top, two 6 mm vertical through-holes
        cyls_z.push_back({0, 0, 16, z0 + 30, z0 + 60});
        holes_z.push_back({-8, 0, 3, z0 + 29, z0 + 61});
        holes_z.push_back({8, 0, 3, z0 + 29, z0 + 61});
        // absorber plate 4 x 30 x 50 beside the stack (+x side)
        double px0 = 16.0 + spec.plate_gap_mm;
        absorber = {{px0, -15, z0}, {px0 + 4.0 * t, 15, z0 + 50}};
        sample_box = {{-16, -16, z0}, {has_absorber ? absorber.hi.x : 16, 16, z0 + 60}};
    } else {
        const double z0 = -9.0;
        const double wall = 1.5, floor_t = 1.5;
        // open box, outer 20 x 20 x 18
        boxes.push_back({{-10, -10, z0}, {10, 10, z0 + 18}});
        hole_boxes.push_back(
            {{-10 + wall, -10 + wall, z0 + floor_t}, {10 - wall, 10 - wall, z0 + 19}});
        const double fz = z0 + floor_t;  // interior floor level
        // cube 6 x 3 x 10 with a cubic hole padded 1 mm on each side
        boxes.push_back({{-8, 2, fz}, {-2, 5, fz + 10}});
        hole_boxes.push_back({{-7, 3, fz + 1}, {-3, 4, fz + 9}});
        // cylinder d=6, h=15 with a 2 mm hole
        cyls_z.push_back({-5, -4, 3, fz, fz + 15});
        holes_z.push_back({-5, -4, 1, fz - 1, fz + 16});
        // cylinder d=3, h=5 with a 0.8 mm hole
        cyls_z.push_back({4, 0, 1.5, fz, fz + 5});
        holes_z.push_back({4, 0, 0.4, fz - 1, fz + 6});
        // absorber plate 1 x 12 x 12 centered in the box
        absorber = {{-0.5 * t, -6, fz}, {0.5 * t, 6, fz + 12}};
        sample_box = {{-10, -10, z0}, {10, 10, z0 + 18}};
    }

    // margin check: all solids need >= 2 voxel air margin inside the grid
    Aabb bounds = g.bounds();
    double margin = 2.0 * g.spacing;
    Aabb need = detail::pad(sample_box, margin);
    if (!bounds.contains(need.lo) || !bounds.contains(need.hi))
        throw std::invalid_argument("phantom solids exceed the grid (margin < 2 voxels)");

    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Vec3 p = g.voxel_center(i, j, k);
                bool solid = false;
                for (const auto& b : boxes) solid = solid || b.contains(p);
                for (const auto& c : cyls_z) solid = solid || c.contains(p);
                if (solid) {
                    for (const auto& h : hole_boxes) solid = solid && !h.contains(p);
                    for (const auto& h : holes_z) solid = solid && !h.contains(p);
                    for (const auto& h : holes_x) solid = solid && !h.contains(p);
                }
                std::size_t idx = g.index(i, j, k);
                if (has_absorber && absorber.contains(p))
                    vol.set(idx, MaterialLabel::Absorber, static_cast<float>(spec.mu_absorber));
                else if (solid)
                    vol.set(idx, MaterialLabel::Sample, static_cast<float>(spec.mu_sample));
            }

    vol.attenuation = {{"air", 0.0},
                       {"sample", spec.mu_sample},
                       {"absorber", spec.mu_absorber}};
    vol.regions.sample = sample_box;
    return vol;
}

/// Adds the pedestal (Holder) and calibration marker spheres (CalMarker) below
/// the sample, and records the region boxes used by the segmentation stage.
/// Throws if a holder or marker voxel would overwrite a sample solid.
inline MaterialVolume attach_holder(MaterialVolume vol, const PhantomSpec& spec) {
    const VolumeGeometry& g = vol.geom();
    const double z_top = (spec.sample_id == 1) ? -32.0 : -9.0;
    const double z_bot = z_top - spec.holder_height_mm;

    Aabb bounds = g.bounds();
    if (z_bot - 2.0 * g.spacing < bounds.lo.z)
        throw std::invalid_argument("holder exceeds the grid");

    std::vector<Vec3> marker_centers;
    for (int m = 0; m < spec.marker_count; ++m) {
        double a = kTwoPi * m / spec.marker_count;
        marker_centers.push_back(
            {spec.marker_ring_radius_mm * std::cos(a), spec.marker_ring_radius_mm * std::sin(a),
             z_top});
    }

    const double r2h = spec.holder_radius_mm * spec.holder_radius_mm;
    const double r2m = spec.marker_radius_mm * spec.marker_radius_mm;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Vec3 p = g.voxel_center(i, j, k);
                bool marker = false;
                for (const auto& c : marker_centers) {
                    Vec3 d = p - c;
                    if (d.dot(d) < r2m) marker = true;
                }
                bool holder = !marker && p.z > z_bot && p.z < z_top &&
                              p.x * p.x + p.y * p.y < r2h;
                if (!marker && !holder) continue;
                std::size_t idx = g.index(i, j, k);
                if (vol.label(idx) != MaterialLabel::Air)
                    throw std::invalid_argument("holder/marker overlaps a sample solid");
                vol.set(idx, marker ? MaterialLabel::CalMarker : MaterialLabel::Holder,
                        static_cast<float>(marker ? spec.mu_marker : spec.mu_holder));
            }

    const double mr = spec.marker_radius_mm, rr = spec.marker_ring_radius_mm;
    vol.regions.markers = {{-rr - mr, -rr - mr, z_top - mr}, {rr + mr, rr + mr, z_top + mr}};
    vol.regions.holder = {{-std::max(spec.holder_radius_mm, rr + mr),
                           -std::max(spec.holder_radius_mm, rr + mr), z_bot},
                          {std::max(spec.holder_radius_mm, rr + mr),
                           std::max(spec.holder_radius_mm, rr + mr), z_top + mr}};
    vol.regions.has_holder = true;
    vol.attenuation["holder"] = spec.mu_holder;
    vol.attenuation["cal_marker"] = spec.mu_marker;
    return vol;
}

inline MaterialVolume build_phantom(const PhantomSpec& spec) {
    return attach_holder(build_sample(spec), spec);
}

}  // namespace ctraj
