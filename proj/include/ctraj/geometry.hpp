// Cone-beam acquisition geometry. The source and detector are fixed in world
// space; each acquisition rotates the sample. World convention: the beam axis
// is +z, the source sits at (0, 0, -source_to_object) and the detector plane
// at z = source_to_detector - source_to_object, with detector columns along +x
// and rows along +y. The sample volume is centered on the origin.
//
// A pose is parameterized by a unit direction d (a sphere-grid pixel center):
// its rotation maps the canonical sample z-axis onto d, followed by an
// optional roll about the beam axis. Distinct directions give distinct view
// geometries; the antipode -z uses a half-turn about the x-axis by convention.
#pragma once

#include <stdexcept>

#include "ctraj/common.hpp"
#include "ctraj/sphere_grid.hpp"

namespace ctraj {

struct DetectorSpec {
    int rows = 72;
    int cols = 72;
    double pixel_pitch = 6.0;          // mm
    double source_to_object = 400.0;   // mm
    double source_to_detector = 800.0; // mm

    void validate() const {
        if (rows < 1 || cols < 1) throw std::invalid_argument("detector must have pixels");
        if (!(source_to_detector > source_to_object && source_to_object > 0))
            throw std::invalid_argument("need source_to_detector > source_to_object > 0");
    }

    Vec3 source_position() const { return {0, 0, -source_to_object}; }

    /// World position of the center of detector pixel (row, col).
    Vec3 pixel_position(int row, int col) const {
        return {(col - 0.5 * (cols - 1)) * pixel_pitch, (row - 0.5 * (rows - 1)) * pixel_pitch,
                source_to_detector - source_to_object};
    }

    double magnification() const { return source_to_detector / source_to_object; }
    bool operator==(const DetectorSpec&) const = default;
};

struct ConeBeamPose {
    Vec3 direction{0, 0, 1};
    double roll = 0.0;
    Mat3 rotation;  // applied to sample coordinates to place them in world
};

/// Minimal rotation taking +z onto `dir` (Rodrigues); at the antipode the axis
/// degenerates and a half-turn about +x is used.
inline Mat3 rotation_z_to(const Vec3& dir) {
    Vec3 d = dir.normalized();
    Vec3 z{0, 0, 1};
    Vec3 axis = z.cross(d);
    double s = axis.norm();
    double c = d.z;
    if (s < 1e-12) {
        if (c > 0) return Mat3::identity();
        Mat3 flip;
        flip.m = {1, 0, 0, 0, -1, 0, 0, 0, -1};
        return flip;
    }
    return rotation_about_axis(axis * (1.0 / s), std::atan2(s, c));
}

inline ConeBeamPose pose_from_direction(const Vec3& dir, double roll = 0.0) {
    ConeBeamPose p;
    p.direction = dir.normalized();
    p.roll = roll;
    Mat3 align = rotation_z_to(p.direction);
    p.rotation = (roll == 0.0) ? align : rotation_about_axis({0, 0, 1}, roll) * align;
    return p;
}

inline ConeBeamPose pose_from_angles(double theta, double phi, double roll = 0.0) {
    return pose_from_direction(direction_from_angles(theta, phi), roll);
}

inline ConeBeamPose pose_from_pixel(const SpherePartition& partition, PixelId id,
                                    double roll = 0.0) {
    auto c = partition.pixel_center(id);
    return pose_from_angles(c.theta, c.phi, roll);
}

}  // namespace ctraj
