// Photon-count noise for simulated measurements. A line integral g maps to an
// expected count i0 * exp(-scale * g); a Poisson draw is log-transformed back.
// Counts are floored at 0.5 before the log, so fully starved rays saturate at
// a finite value instead of infinity -- the bias and streaks this causes for
// heavily absorbing views are exactly the effect an absorption-aware
// trajectory is supposed to avoid.
#pragma once

#include <cmath>

#include "ctraj/common.hpp"
#include "ctraj/projector.hpp"

namespace ctraj {

struct NoiseModel {
    bool enabled = false;
    double i0 = 2e4;               // photons per ray at zero attenuation
    double attenuation_scale = 0.05;  // optical depth per line-integral unit

    void validate() const {
        if (enabled && (i0 <= 0.0 || attenuation_scale <= 0.0))
            throw std::invalid_argument("noise model needs positive i0 and attenuation_scale");
    }
};

inline void apply_photon_noise(Sinogram& sino, const NoiseModel& model, Rng& rng) {
    if (!model.enabled) return;
    model.validate();
    const double k = model.attenuation_scale;
    for (auto& v : sino.data) {
        double mean = model.i0 * std::exp(-k * static_cast<double>(v));
        double counts = std::max(0.5, static_cast<double>(rng.poisson(mean)));
        v = static_cast<float>(std::max(0.0, -std::log(counts / model.i0) / k));
    }
}

}  // namespace ctraj
