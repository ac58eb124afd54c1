// Voxel grids. A VoxelField is a bare float grid centered on the world origin
// with isotropic spacing; MaterialVolume adds per-voxel material labels and
// the region metadata the segmentation stage needs. On disk a volume is raw
// little-endian float32 in x-fastest order plus a JSON sidecar (and a parallel
// raw uint8 file when labels are present).
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctraj/common.hpp"

namespace ctraj {

enum class MaterialLabel : std::uint8_t { Air = 0, Holder, CalMarker, Sample, Absorber };

inline const char* to_string(MaterialLabel l) {
    switch (l) {
        case MaterialLabel::Air: return "air";
        case MaterialLabel::Holder: return "holder";
        case MaterialLabel::CalMarker: return "cal_marker";
        case MaterialLabel::Sample: return "sample";
        case MaterialLabel::Absorber: return "absorber";
    }
    return "?";
}

struct VolumeGeometry {
    int nx = 0, ny = 0, nz = 0;
    double spacing = 1.0;  // mm, isotropic

    std::size_t size() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    /// World position (mm) of a voxel center; the grid is centered at the origin.
    Vec3 voxel_center(int i, int j, int k) const {
        return {(i - 0.5 * (nx - 1)) * spacing, (j - 0.5 * (ny - 1)) * spacing,
                (k - 0.5 * (nz - 1)) * spacing};
    }
    /// Continuous voxel coordinate of a world point (voxel i center maps to i).
    Vec3 world_to_voxel(const Vec3& p) const {
        return {p.x / spacing + 0.5 * (nx - 1), p.y / spacing + 0.5 * (ny - 1),
                p.z / spacing + 0.5 * (nz - 1)};
    }
    Aabb bounds() const {
        Vec3 half{0.5 * nx * spacing, 0.5 * ny * spacing, 0.5 * nz * spacing};
        return {-half, half};
    }
    bool operator==(const VolumeGeometry&) const = default;
};

struct VoxelField {
    VolumeGeometry geom;
    std::vector<float> data;

    VoxelField() = default;
    explicit VoxelField(const VolumeGeometry& g) : geom(g), data(g.size(), 0.0f) {}

    float& at(int i, int j, int k) { return data[geom.index(i, j, k)]; }
    float at(int i, int j, int k) const { return data[geom.index(i, j, k)]; }

    /// Trilinear sample at a continuous voxel coordinate; outside is 0.
    double sample(double x, double y, double z) const {
        int i0 = static_cast<int>(std::floor(x)), j0 = static_cast<int>(std::floor(y)),
            k0 = static_cast<int>(std::floor(z));
        double fx = x - i0, fy = y - j0, fz = z - k0;
        double acc = 0.0;
        for (int dk = 0; dk < 2; ++dk)
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di) {
                    int i = i0 + di, j = j0 + dj, k = k0 + dk;
                    if (i < 0 || j < 0 || k < 0 || i >= geom.nx || j >= geom.ny || k >= geom.nz)
                        continue;
                    double w = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
                    acc += w * data[geom.index(i, j, k)];
                }
        return acc;
    }
};

/// Axis-aligned world-space boxes of the labeled regions, for segmentation.
struct RegionBoxes {
    Aabb holder{};   // holder together with the calibration markers
    Aabb markers{};  // tight box around the marker spheres
    Aabb sample{};   // sample objects including the absorber
    bool has_holder = false;
};

struct MaterialVolume {
    VoxelField mu;
    std::vector<std::uint8_t> labels;
    std::map<std::string, double> attenuation;  // label name -> mu value used
    RegionBoxes regions;

    MaterialVolume() = default;
    explicit MaterialVolume(const VolumeGeometry& g) : mu(g), labels(g.size(), 0) {}

    const VolumeGeometry& geom() const { return mu.geom; }
    MaterialLabel label(std::size_t idx) const { return static_cast<MaterialLabel>(labels[idx]); }

    std::size_t count_label(MaterialLabel l) const {
        std::size_t n = 0;
        for (auto v : labels)
            if (v == static_cast<std::uint8_t>(l)) ++n;
        return n;
    }

    void set(std::size_t idx, MaterialLabel l, float value) {
        labels[idx] = static_cast<std::uint8_t>(l);
        mu.data[idx] = value;
    }
};

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------
namespace io {

inline void write_raw_floats(const std::string& path, const std::vector<float>& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(float)));
}

inline std::vector<float> read_raw_floats(const std::string& path, std::size_t count) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::vector<float> data(count);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(float))
        throw std::runtime_error("short read: " + path);
    return data;
}

inline nlohmann::json aabb_to_json(const Aabb& b) {
    return {{b.lo.x, b.lo.y, b.lo.z}, {b.hi.x, b.hi.y, b.hi.z}};
}

inline Aabb aabb_from_json(const nlohmann::json& j) {
    return {{j[0][0], j[0][1], j[0][2]}, {j[1][0], j[1][1], j[1][2]}};
}

/// Writes <stem>.raw + <stem>.json, and <stem>.labels.raw when labels exist.
inline void save_volume(const std::string& stem, const VoxelField& field,
                        const std::vector<std::uint8_t>* labels = nullptr,
                        const std::map<std::string, double>* attenuation = nullptr,
                        const RegionBoxes* regions = nullptr) {
    write_raw_floats(stem + ".raw", field.data);
    nlohmann::json j;
    j["dims"] = {field.geom.nx, field.geom.ny, field.geom.nz};
    j["spacing_mm"] = field.geom.spacing;
    j["order"] = "x-fastest";
    j["dtype"] = "float32-le";
    j["data_file"] = std::filesystem::path(stem + ".raw").filename().string();
    if (labels && !labels->empty()) {
        std::ofstream os(stem + ".labels.raw", std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for writing: " + stem + ".labels.raw");
        os.write(reinterpret_cast<const char*>(labels->data()),
                 static_cast<std::streamsize>(labels->size()));
        j["labels_file"] = std::filesystem::path(stem + ".labels.raw").filename().string();
    }
    if (attenuation) j["attenuation"] = *attenuation;
    if (regions && regions->has_holder) {
        j["regions"]["holder"] = aabb_to_json(regions->holder);
        j["regions"]["markers"] = aabb_to_json(regions->markers);
        j["regions"]["sample"] = aabb_to_json(regions->sample);
    } else if (regions) {
        j["regions"]["sample"] = aabb_to_json(regions->sample);
    }
    std::ofstream os(stem + ".json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + stem + ".json");
    os << j.dump(2) << '\n';
}

inline void save_volume(const std::string& stem, const MaterialVolume& vol) {
    save_volume(stem, vol.mu, &vol.labels, &vol.attenuation, &vol.regions);
}

inline MaterialVolume load_volume(const std::string& stem) {
    std::ifstream is(stem + ".json");
    if (!is) throw std::runtime_error("cannot open: " + stem + ".json");
    nlohmann::json j = nlohmann::json::parse(is);
    VolumeGeometry g;
    g.nx = j["dims"][0];
    g.ny = j["dims"][1];
    g.nz = j["dims"][2];
    g.spacing = j["spacing_mm"];
    auto dir = std::filesystem::path(stem).parent_path();
    MaterialVolume vol(g);
    vol.mu.data = read_raw_floats((dir / j["data_file"].get<std::string>()).string(), g.size());
    if (j.contains("labels_file")) {
        std::ifstream ls(dir / j["labels_file"].get<std::string>(), std::ios::binary);
        if (!ls) throw std::runtime_error("cannot open labels file for " + stem);
        ls.read(reinterpret_cast<char*>(vol.labels.data()),
                static_cast<std::streamsize>(vol.labels.size()));
    }
    if (j.contains("attenuation"))
        vol.attenuation = j["attenuation"].get<std::map<std::string, double>>();
    if (j.contains("regions")) {
        if (j["regions"].contains("holder")) {
            vol.regions.holder = aabb_from_json(j["regions"]["holder"]);
            vol.regions.markers = aabb_from_json(j["regions"]["markers"]);
            vol.regions.has_holder = true;
        }
        if (j["regions"].contains("sample"))
            vol.regions.sample = aabb_from_json(j["regions"]["sample"]);
    }
    return vol;
}

}  // namespace io
}  // namespace ctraj
