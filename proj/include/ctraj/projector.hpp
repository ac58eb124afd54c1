// Ray-driven cone-beam X-ray transform (Joseph interpolation) and its exact
// algebraic adjoint. Rays march the volume one voxel plane at a time along the
// dominant axis, bilinearly interpolating in the two minor axes; samples
// outside the grid contribute zero. The back projector scatters with the same
// indices and weights, so <Ax, y> == <x, A^T y> up to round-off -- which the
// conjugate-gradient solver relies on.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ctraj/geometry.hpp"
#include "ctraj/volume.hpp"

namespace ctraj {

struct Sinogram {
    int n_views = 0;
    int rows = 0;
    int cols = 0;
    std::vector<float> data;  // view-major, then row-major

    Sinogram() = default;
    Sinogram(int v, int r, int c)
        : n_views(v), rows(r), cols(c),
          data(static_cast<std::size_t>(v) * r * c, 0.0f) {}

    std::size_t view_size() const { return static_cast<std::size_t>(rows) * cols; }
    float* view(int v) { return data.data() + view_size() * v; }
    const float* view(int v) const { return data.data() + view_size() * v; }
    float& at(int v, int r, int c) { return data[view_size() * v + static_cast<std::size_t>(r) * cols + c]; }
    float at(int v, int r, int c) const {
        return data[view_size() * v + static_cast<std::size_t>(r) * cols + c];
    }

    void append(const Sinogram& other) {
        if (n_views == 0) {
            rows = other.rows;
            cols = other.cols;
        }
        if (rows != other.rows || cols != other.cols)
            throw std::invalid_argument("appending sinogram with mismatched detector");
        data.insert(data.end(), other.data.begin(), other.data.end());
        n_views += other.n_views;
    }
};

namespace detail {

inline double axis_value(const Vec3& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }

/// Joseph traversal of one ray: integer planes m along the dominant axis with
/// the minor coordinates linear in m. The plane range is pre-clipped to where
/// the bilinear footprint can touch the grid; planes outside it contribute
/// exactly zero, so clipping changes nothing but work.
struct JosephRay {
    int axis;            // dominant axis 0/1/2
    int m_begin, m_end;  // half-open plane range
    double sa, su, sv;   // source in voxel coords (dominant, minor, minor)
    double du, dv;       // minor-coordinate slope per dominant plane
    double step_length;  // mm of path per plane
    std::size_t s_u, s_v, s_a;  // strides of (minor u, minor v, dominant)
    int n_u, n_v;        // minor-axis extents
};

inline bool setup_ray(const VolumeGeometry& g, const Vec3& src_world, const Vec3& dir_world,
                      JosephRay& ray) {
    Vec3 src = g.world_to_voxel(src_world);
    Vec3 dir = dir_world.normalized();
    double ax = std::fabs(dir.x), ay = std::fabs(dir.y), az = std::fabs(dir.z);
    int a = (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
    double da = axis_value(dir, a);
    if (std::fabs(da) < 1e-12) return false;
    const int u = (a + 1) % 3, v = (a + 2) % 3;
    const int n[3] = {g.nx, g.ny, g.nz};
    const std::size_t stride[3] = {1, static_cast<std::size_t>(g.nx),
                                   static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny)};
    ray.axis = a;
    ray.sa = axis_value(src, a);
    ray.su = axis_value(src, u);
    ray.sv = axis_value(src, v);
    ray.du = axis_value(dir, u) / da;
    ray.dv = axis_value(dir, v) / da;
    ray.step_length = g.spacing / std::fabs(da);
    ray.s_u = stride[u];
    ray.s_v = stride[v];
    ray.s_a = stride[a];
    ray.n_u = n[u];
    ray.n_v = n[v];

    // clip planes to where both minor coordinates lie in [-1, n): outside the
    // interpolation reaches no voxel
    double lo = 0.0, hi = static_cast<double>(n[a] - 1);
    auto clip = [&](double s, double d, int limit) {
        if (std::fabs(d) < 1e-14) {
            if (s < -1.0 || s >= limit) hi = lo - 1.0;
            return;
        }
        double t0 = ray.sa + (-1.0 - s) / d;
        double t1 = ray.sa + (static_cast<double>(limit) - s) / d;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    };
    clip(ray.su, ray.du, ray.n_u);
    clip(ray.sv, ray.dv, ray.n_v);
    ray.m_begin = static_cast<int>(std::ceil(lo));
    ray.m_end = static_cast<int>(std::floor(hi)) + 1;
    if (ray.m_begin < 0) ray.m_begin = 0;
    if (ray.m_end > n[a]) ray.m_end = n[a];
    return ray.m_begin < ray.m_end;
}

}  // namespace detail

/// One view of the X-ray transform; `out` must point at rows*cols floats.
/// Rays that miss the volume produce zeros.
inline void project_view(const VoxelField& vol, const ConeBeamPose& pose, const DetectorSpec& det,
                         float* out, int row_begin = 0, int row_end = -1) {
    const VolumeGeometry& g = vol.geom;
    const Vec3 src_world = pose.rotation.apply_t(det.source_position());
    if (g.bounds().contains(src_world))
        throw std::invalid_argument("degenerate geometry: source inside the volume");
    if (row_end < 0) row_end = det.rows;

    for (int r = row_begin; r < row_end; ++r) {
        for (int c = 0; c < det.cols; ++c) {
            // world ray -> sample frame (rotation transpose), then voxel coords
            Vec3 pix_world = pose.rotation.apply_t(det.pixel_position(r, c));
            detail::JosephRay ray{};
            double value = 0.0;
            if (detail::setup_ray(g, src_world, pix_world - src_world, ray)) {
                double acc = 0.0;
                for (int m = ray.m_begin; m < ray.m_end; ++m) {
                    double pu = ray.su + (m - ray.sa) * ray.du;
                    double pv = ray.sv + (m - ray.sa) * ray.dv;
                    int iu = static_cast<int>(std::floor(pu));
                    int iv = static_cast<int>(std::floor(pv));
                    if (iu < -1 || iu >= ray.n_u || iv < -1 || iv >= ray.n_v) continue;
                    double fu = pu - iu, fv = pv - iv;
                    const float* base = vol.data.data() + static_cast<std::size_t>(m) * ray.s_a;
                    bool u0 = iu >= 0, u1 = iu + 1 < ray.n_u;
                    bool v0 = iv >= 0, v1 = iv + 1 < ray.n_v;
                    double plane = 0.0;
                    if (u0 && v0) plane += (1 - fu) * (1 - fv) * base[iu * ray.s_u + iv * ray.s_v];
                    if (u1 && v0)
                        plane += fu * (1 - fv) * base[(iu + 1) * ray.s_u + iv * ray.s_v];
                    if (u0 && v1)
                        plane += (1 - fu) * fv * base[iu * ray.s_u + (iv + 1) * ray.s_v];
                    if (u1 && v1)
                        plane += fu * fv * base[(iu + 1) * ray.s_u + (iv + 1) * ray.s_v];
                    acc += plane;
                }
                value = acc * ray.step_length;
            }
            out[static_cast<std::size_t>(r) * det.cols + c] = static_cast<float>(value);
        }
    }
}

inline Sinogram forward_project(const VoxelField& vol, std::span<const ConeBeamPose> poses,
                                const DetectorSpec& det, int threads = 0) {
    det.validate();
    for (const auto& pose : poses)
        if (vol.geom.bounds().contains(pose.rotation.apply_t(det.source_position())))
            throw std::invalid_argument("degenerate geometry: source inside the volume");
    Sinogram sino(static_cast<int>(poses.size()), det.rows, det.cols);
    // parallel over (view, row-block): each output element is written once
    for (std::size_t v = 0; v < poses.size(); ++v) {
        parallel_for(static_cast<std::size_t>(det.rows), threads,
                     [&](std::size_t rb, std::size_t re, int) {
                         project_view(vol, poses[v], det, sino.view(static_cast<int>(v)),
                                      static_cast<int>(rb), static_cast<int>(re));
                     });
    }
    return sino;
}

inline Sinogram forward_project(const MaterialVolume& vol, std::span<const ConeBeamPose> poses,
                                const DetectorSpec& det, int threads = 0) {
    return forward_project(vol.mu, poses, det, threads);
}

/// Adjoint of forward_project onto `grid`. Accumulation is race-free and
/// reproducible: each thread owns a partial grid for its view block; partials
/// are reduced in thread order.
inline VoxelField back_project(const Sinogram& sino, std::span<const ConeBeamPose> poses,
                               const DetectorSpec& det, const VolumeGeometry& grid,
                               int threads = 0) {
    det.validate();
    if (static_cast<std::size_t>(sino.n_views) != poses.size() || sino.rows != det.rows ||
        sino.cols != det.cols)
        throw std::invalid_argument("sinogram dimensions do not match poses/detector");

    int nt = resolve_threads(threads);
    std::vector<VoxelField> partials;
    partials.reserve(nt);
    for (int t = 0; t < nt; ++t) partials.emplace_back(grid);

    parallel_for(poses.size(), nt, [&](std::size_t vb, std::size_t ve, int tid) {
        VoxelField& acc = partials[tid];
        for (std::size_t view = vb; view < ve; ++view) {
            const ConeBeamPose& pose = poses[view];
            const Vec3 src_world = pose.rotation.apply_t(det.source_position());
            const float* slice = sino.view(static_cast<int>(view));
            for (int r = 0; r < det.rows; ++r)
                for (int c = 0; c < det.cols; ++c) {
                    float y = slice[static_cast<std::size_t>(r) * det.cols + c];
                    if (y == 0.0f) continue;
                    Vec3 pix_world = pose.rotation.apply_t(det.pixel_position(r, c));
                    detail::JosephRay ray{};
                    if (!detail::setup_ray(grid, src_world, pix_world - src_world, ray)) continue;
                    const double w = static_cast<double>(y) * ray.step_length;
                    for (int m = ray.m_begin; m < ray.m_end; ++m) {
                        double pu = ray.su + (m - ray.sa) * ray.du;
                        double pv = ray.sv + (m - ray.sa) * ray.dv;
                        int iu = static_cast<int>(std::floor(pu));
                        int iv = static_cast<int>(std::floor(pv));
                        if (iu < -1 || iu >= ray.n_u || iv < -1 || iv >= ray.n_v) continue;
                        double fu = pu - iu, fv = pv - iv;
                        float* base = acc.data.data() + static_cast<std::size_t>(m) * ray.s_a;
                        bool u0 = iu >= 0, u1 = iu + 1 < ray.n_u;
                        bool v0 = iv >= 0, v1 = iv + 1 < ray.n_v;
                        if (u0 && v0)
                            base[iu * ray.s_u + iv * ray.s_v] +=
                                static_cast<float>(w * (1 - fu) * (1 - fv));
                        if (u1 && v0)
                            base[(iu + 1) * ray.s_u + iv * ray.s_v] +=
                                static_cast<float>(w * fu * (1 - fv));
                        if (u0 && v1)
                            base[iu * ray.s_u + (iv + 1) * ray.s_v] +=
                                static_cast<float>(w * (1 - fu) * fv);
                        if (u1 && v1)
                            base[(iu + 1) * ray.s_u + (iv + 1) * ray.s_v] +=
                                static_cast<float>(w * fu * fv);
                    }
                }
        }
    });

    VoxelField out(grid);
    for (int t = 0; t < nt; ++t)
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += partials[t].data[i];
    return out;
}

// ---------------------------------------------------------------------------
// Sinogram file I/O: raw float32 view-major + JSON sidecar with the per-view
// poses and the detector spec.
// ---------------------------------------------------------------------------
namespace io {

inline void save_sinogram(const std::string& stem, const Sinogram& sino,
                          std::span<const ConeBeamPose> poses, const DetectorSpec& det) {
    write_raw_floats(stem + ".raw", sino.data);
    nlohmann::json j;
    j["n_views"] = sino.n_views;
    j["rows"] = sino.rows;
    j["cols"] = sino.cols;
    j["dtype"] = "float32-le";
    j["order"] = "view-major";
    j["data_file"] = std::filesystem::path(stem + ".raw").filename().string();
    j["detector"] = {{"rows", det.rows},
                     {"cols", det.cols},
                     {"pixel_pitch_mm", det.pixel_pitch},
                     {"source_to_object_mm", det.source_to_object},
                     {"source_to_detector_mm", det.source_to_detector}};
    auto& jp = j["poses"] = nlohmann::json::array();
    for (const auto& p : poses) {
        nlohmann::json e;
        e["direction"] = {p.direction.x, p.direction.y, p.direction.z};
        e["roll"] = p.roll;
        e["rotation"] = p.rotation.m;
        jp.push_back(std::move(e));
    }
    std::ofstream os(stem + ".json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + stem + ".json");
    os << j.dump(2) << '\n';
}

struct LoadedSinogram {
    Sinogram sino;
    std::vector<ConeBeamPose> poses;
    DetectorSpec det;
};

inline LoadedSinogram load_sinogram(const std::string& stem) {
    std::ifstream is(stem + ".json");
    if (!is) throw std::runtime_error("cannot open: " + stem + ".json");
    nlohmann::json j = nlohmann::json::parse(is);
    LoadedSinogram out;
    out.sino = Sinogram(j["n_views"], j["rows"], j["cols"]);
    auto dir = std::filesystem::path(stem).parent_path();
    out.sino.data =
        read_raw_floats((dir / j["data_file"].get<std::string>()).string(), out.sino.data.size());
    out.det.rows = j["detector"]["rows"];
    out.det.cols = j["detector"]["cols"];
    out.det.pixel_pitch = j["detector"]["pixel_pitch_mm"];
    out.det.source_to_object = j["detector"]["source_to_object_mm"];
    out.det.source_to_detector = j["detector"]["source_to_detector_mm"];
    for (const auto& e : j["poses"]) {
        ConeBeamPose p;
        p.direction = {e["direction"][0], e["direction"][1], e["direction"][2]};
        p.roll = e["roll"];
        p.rotation.m = e["rotation"];
        out.poses.push_back(p);
    }
    return out;
}

}  // namespace io
}  // namespace ctraj
