// Parametric stand-in for the robotic sample holder: a union of spherical
// caps the arm cannot reach, plus independent per-attempt failure modes
// (hardware error during motion, calibration failure in post-processing).
// The default cap layout is calibrated against reference reachable-pose
// counts per grid density, not against a real arm.
#pragma once

#include <cstdint>
#include <vector>

#include "ctraj/common.hpp"
#include "ctraj/geometry.hpp"

namespace ctraj {

struct SphericalCap {
    Vec3 center{0, 0, 1};
    double radius_deg = 0.0;
};

struct ReachabilitySpec {
    std::vector<SphericalCap> unreachable_caps;
    double p_hardware = 0.0;
    double p_calibration = 0.0;

    void validate() const {
        if (p_hardware < 0 || p_hardware > 1 || p_calibration < 0 || p_calibration > 1)
            throw std::invalid_argument("failure probabilities must be in [0, 1]");
    }
};

inline bool is_reachable(const ReachabilitySpec& spec, const Vec3& direction) {
    Vec3 d = direction.normalized();
    for (const auto& cap : spec.unreachable_caps)
        if (d.dot(cap.center.normalized()) >= std::cos(deg_to_rad(cap.radius_deg))) return false;
    return true;
}

enum class AcquisitionOutcome : std::uint8_t { Ok = 0, HardwareError, CalibrationError, Unreachable };

inline const char* to_string(AcquisitionOutcome o) {
    switch (o) {
        case AcquisitionOutcome::Ok: return "Ok";
        case AcquisitionOutcome::HardwareError: return "HardwareError";
        case AcquisitionOutcome::CalibrationError: return "CalibrationError";
        case AcquisitionOutcome::Unreachable: return "Unreachable";
    }
    return "?";
}

inline AcquisitionOutcome attempt_acquisition(const ReachabilitySpec& spec,
                                              const ConeBeamPose& pose, Rng& rng) {
    if (!is_reachable(spec, pose.direction)) return AcquisitionOutcome::Unreachable;
    double u_hw = rng.uniform();
    double u_cal = rng.uniform();
    if (u_hw < spec.p_hardware) return AcquisitionOutcome::HardwareError;
    if (u_cal < spec.p_calibration) return AcquisitionOutcome::CalibrationError;
    return AcquisitionOutcome::Ok;
}

/// Cap layout tuned so the discrete reachable counts match the design
/// targets: 89 of 108 poses at n_side=3 and about 725 of 972 at n_side=9.
/// Both poles are occluded (beams near the sample's vertical axis pass the
/// mount); three mid-latitude caps model arm-specific dead zones. Failure
/// probabilities default to zero.
inline ReachabilitySpec default_reachability() {
    ReachabilitySpec spec;
    spec.unreachable_caps = {
        {direction_from_angles(deg_to_rad(0.0), deg_to_rad(0.0)), 30.590},
        {direction_from_angles(deg_to_rad(180.0), deg_to_rad(0.0)), 31.545},
        {direction_from_angles(deg_to_rad(53.279), deg_to_rad(325.061)), 23.277},
        {direction_from_angles(deg_to_rad(125.569), deg_to_rad(0.340)), 25.943},
        {direction_from_angles(deg_to_rad(73.526), deg_to_rad(213.746)), 23.072},
    };
    return spec;
}

}  // namespace ctraj
