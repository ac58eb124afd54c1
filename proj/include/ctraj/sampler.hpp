// Pose sampling. Scores become weights w = 1 / max(score, x_min)^s, so highly
// absorbing poses are strongly suppressed as the penalty exponent s grows.
// Only Untried pixels with a defined score are candidates; everything else has
// weight exactly zero. Draws use inverse-CDF over explicit cumulative sums
// with a fully specified RNG, so a fixed seed reproduces the same trajectory
// on any platform.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctraj/common.hpp"
#include "ctraj/score_map.hpp"

namespace ctraj {

struct SamplerConfig {
    double s = 20.0;    // penalty exponent, >= 1
    double x_min = 1.0; // score clamp; an L0 of 0 still gets a finite weight

    void validate() const {
        if (s < 1.0) throw std::invalid_argument("penalty s must be >= 1");
        if (x_min < 1.0) throw std::invalid_argument("x_min must be >= 1");
    }
};

inline std::vector<double> build_weights(const SphereScoreMap& map, const SamplerConfig& cfg) {
    cfg.validate();
    std::vector<double> w(map.n_pix(), 0.0);
    for (PixelId i = 0; i < map.n_pix(); ++i) {
        if (map.state(i) != PoseState::Untried) continue;
        const auto& score = map.score(i);
        if (!score) continue;
        double x = std::max(static_cast<double>(*score), cfg.x_min);
        w[i] = std::pow(x, -cfg.s);
    }
    return w;
}

inline bool has_candidates(std::span<const double> weights) {
    for (double v : weights)
        if (v > 0.0) return true;
    return false;
}

/// Draws index i with probability w_i / sum(w). Throws when all weights are
/// zero (no candidate poses remain).
inline PixelId sample_next(std::span<const double> weights, Rng& rng) {
    std::vector<double> cum(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("negative weight");
        total += weights[i];
        cum[i] = total;
    }
    if (total <= 0.0) throw std::runtime_error("no candidate poses remain (all weights zero)");
    double u = rng.uniform() * total;
    // first index with cum > u; zero-weight entries can never satisfy it
    std::size_t lo = 0, hi = weights.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (cum[mid] > u)
            hi = mid;
        else
            lo = mid + 1;
    }
    return static_cast<PixelId>(lo);
}

}  // namespace ctraj
