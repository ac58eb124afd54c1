// Iterative reconstruction: conjugate gradient on the normal equations of the
// Tikhonov-regularized weighted least-squares problem
//     min_x ||W^1/2 (A x - b)||^2 + lambda ||x||^2
// i.e. CG on (A^T W A + lambda I) x = A^T W b from a zero start, for a fixed
// iteration count. The residual history records the objective value
// sqrt(||W^1/2(Ax-b)||^2 + lambda||x||^2), tracked incrementally from the CG
// step sizes (no extra operator applications); it is non-increasing by
// construction of the CG descent.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctraj/projector.hpp"

namespace ctraj {

struct ReconConfig {
    VolumeGeometry grid;
    double lambda = -1.0;  // < 0: auto, 1e-4 x mean-diagonal estimate of A^T W A
    int iterations = 30;
    std::vector<float> ray_weights;  // per-ray weights W; empty = identity
    int threads = 0;
};

struct ReconResult {
    VoxelField volume;
    std::vector<double> residual_history;  // objective at x_0, x_1, ...
    double lambda_used = 0.0;
};

namespace detail {

inline double dot(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

inline void apply_weights(std::vector<float>& v, const std::vector<float>& w) {
    if (w.empty()) return;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
}

/// Mean diagonal of A^T W A estimated with Rademacher probes:
/// E[||W^1/2 A z||^2] = tr(A^T W A) for z with +-1 entries.
inline double mean_diagonal_estimate(std::span<const ConeBeamPose> poses, const DetectorSpec& det,
                                     const VolumeGeometry& grid,
                                     const std::vector<float>& weights, int threads,
                                     int probes = 8) {
    Rng rng(0x9e3779b97f4a7c15ull);
    double acc = 0.0;
    for (int p = 0; p < probes; ++p) {
        VoxelField z(grid);
        for (auto& v : z.data) v = (rng.next() & 1) ? 1.0f : -1.0f;
        Sinogram az = forward_project(z, poses, det, threads);
        if (weights.empty()) {
            acc += dot(az.data, az.data);
        } else {
            for (std::size_t i = 0; i < az.data.size(); ++i)
                acc += static_cast<double>(weights[i]) * az.data[i] * az.data[i];
        }
    }
    return acc / (probes * static_cast<double>(grid.size()));
}

}  // namespace detail

inline ReconResult reconstruct(const Sinogram& b, std::span<const ConeBeamPose> poses,
                               const DetectorSpec& det, const ReconConfig& cfg) {
    if (static_cast<std::size_t>(b.n_views) != poses.size() || b.rows != det.rows ||
        b.cols != det.cols)
        throw std::invalid_argument("sinogram dimensions do not match poses/detector");
    if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!cfg.ray_weights.empty() && cfg.ray_weights.size() != b.data.size())
        throw std::invalid_argument("ray_weights size mismatch");
    for (float v : b.data)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite sinogram value");

    double lambda = cfg.lambda;
    if (lambda < 0.0)
        lambda = 1e-4 * detail::mean_diagonal_estimate(poses, det, cfg.grid, cfg.ray_weights,
                                                       cfg.threads);

    // c = A^T W b
    Sinogram wb = b;
    detail::apply_weights(wb.data, cfg.ray_weights);
    VoxelField c = back_project(wb, poses, det, cfg.grid, cfg.threads);

    // phi(x) = 2 E(x) + b^T W b with E the CG energy; E decreases by
    // alpha*rs/2 each accepted step.
    double btwb = cfg.ray_weights.empty()
                      ? detail::dot(b.data, b.data)
                      : [&] {
                            double s = 0.0;
                            for (std::size_t i = 0; i < b.data.size(); ++i)
                                s += static_cast<double>(cfg.ray_weights[i]) * b.data[i] * b.data[i];
                            return s;
                        }();

    VoxelField x(cfg.grid);
    std::vector<float> r = c.data;
    std::vector<float> p = r;
    double rs = detail::dot(r, r);
    double energy2 = 0.0;  // 2*E(x_k)

    ReconResult out;
    out.lambda_used = lambda;
    out.residual_history.push_back(std::sqrt(std::max(0.0, btwb)));

    VoxelField pf(cfg.grid);
    for (int it = 0; it < cfg.iterations; ++it) {
        if (rs == 0.0) {
            out.residual_history.push_back(out.residual_history.back());
            continue;
        }
        pf.data = p;
        Sinogram ap = forward_project(pf, poses, det, cfg.threads);
        detail::apply_weights(ap.data, cfg.ray_weights);
        VoxelField q = back_project(ap, poses, det, cfg.grid, cfg.threads);
        if (lambda != 0.0)
            for (std::size_t i = 0; i < q.data.size(); ++i)
                q.data[i] += static_cast<float>(lambda) * p[i];
        double pq = detail::dot(p, q.data);
        if (pq <= 0.0) {
            out.residual_history.push_back(out.residual_history.back());
            rs = 0.0;
            continue;
        }
        double alpha = rs / pq;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            x.data[i] += static_cast<float>(alpha * p[i]);
            r[i] -= static_cast<float>(alpha * q.data[i]);
        }
        energy2 -= alpha * rs;
        out.residual_history.push_back(std::sqrt(std::max(0.0, btwb + energy2)));
        double rs_new = detail::dot(r, r);
        double beta = rs_new / rs;
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = r[i] + static_cast<float>(beta) * p[i];
        rs = rs_new;
    }
    out.volume = std::move(x);
    return out;
}

}  // namespace ctraj
