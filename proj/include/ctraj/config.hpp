// Experiment configuration as a single human-editable text file: INI-style
// [section] headers with key = value lines, # comments, and repeatable keys
// for caps and profiles. Every tunable default is written out explicitly by
// the serializer so a run's config snapshot is self-describing.
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctraj/pipeline.hpp"

namespace ctraj {

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigText {
    // section -> key -> values (repeatable keys keep every occurrence)
    std::map<std::string, std::map<std::string, std::vector<std::string>>> entries;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = entries.find(sec);
        if (s == entries.end()) return false;
        return s->second.count(key) > 0;
    }
    const std::string& get(const std::string& sec, const std::string& key) const {
        return entries.at(sec).at(key).front();
    }
    std::vector<std::string> get_all(const std::string& sec, const std::string& key) const {
        if (!has(sec, key)) return {};
        return entries.at(sec).at(key);
    }
};

inline ConfigText parse_config_text(std::istream& is) {
    ConfigText out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        out.entries[section][key].push_back(value);
    }
    return out;
}

inline double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::runtime_error("bad number: " + s);
    return v;
}

inline int to_int(const std::string& s) {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::runtime_error("bad integer: " + s);
    return v;
}

inline bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::runtime_error("bad boolean: " + s);
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& is) {
    using namespace detail;
    ConfigText t = parse_config_text(is);
    ExperimentConfig cfg;

    auto num = [&](const char* sec, const char* key, double& dst) {
        if (t.has(sec, key)) dst = to_double(t.get(sec, key));
    };
    auto inum = [&](const char* sec, const char* key, int& dst) {
        if (t.has(sec, key)) dst = to_int(t.get(sec, key));
    };
    auto flag = [&](const char* sec, const char* key, bool& dst) {
        if (t.has(sec, key)) dst = to_bool(t.get(sec, key));
    };

    int sample_id = cfg.phantom.sample_id;
    int grid = cfg.phantom.grid;
    if (t.has("phantom", "sample")) sample_id = to_int(t.get("phantom", "sample"));
    if (t.has("phantom", "grid")) grid = to_int(t.get("phantom", "grid"));
    cfg.phantom = default_phantom_spec(sample_id, grid);
    num("phantom", "world_mm", cfg.phantom.world_mm);
    num("phantom", "mu_sample", cfg.phantom.mu_sample);
    num("phantom", "mu_absorber", cfg.phantom.mu_absorber);
    num("phantom", "mu_holder", cfg.phantom.mu_holder);
    num("phantom", "mu_marker", cfg.phantom.mu_marker);
    num("phantom", "plate_gap_mm", cfg.phantom.plate_gap_mm);
    num("phantom", "absorber_scale", cfg.phantom.absorber_scale);
    num("phantom", "holder_height_mm", cfg.phantom.holder_height_mm);
    num("phantom", "holder_radius_mm", cfg.phantom.holder_radius_mm);
    num("phantom", "marker_radius_mm", cfg.phantom.marker_radius_mm);
    num("phantom", "marker_ring_radius_mm", cfg.phantom.marker_ring_radius_mm);
    inum("phantom", "marker_count", cfg.phantom.marker_count);

    inum("detector", "rows", cfg.detector.rows);
    inum("detector", "cols", cfg.detector.cols);
    num("detector", "pixel_pitch_mm", cfg.detector.pixel_pitch);
    num("detector", "source_to_object_mm", cfg.detector.source_to_object);
    num("detector", "source_to_detector_mm", cfg.detector.source_to_detector);

    inum("sphere", "n_side_low", cfg.n_side_low);
    inum("sphere", "n_side_high", cfg.n_side_high);
    inum("sphere", "baseline_n_side", cfg.baseline_n_side);
    inum("sphere", "random_n_side", cfg.random_n_side);

    num("optimize", "r_deg", cfg.r_deg);
    num("optimize", "s", cfg.sampler.s);
    num("optimize", "x_min", cfg.sampler.x_min);
    inum("optimize", "budget", cfg.budget);
    flag("optimize", "spread_all_poses", cfg.spread_all_poses);

    inum("recon", "coarse_grid", cfg.coarse_grid);
    inum("recon", "coarse_iterations", cfg.coarse_iterations);
    inum("recon", "final_grid", cfg.final_grid);
    inum("recon", "final_iterations", cfg.final_iterations);
    num("recon", "lambda", cfg.lambda);

    num("segmentation", "relevant_fraction", cfg.segmentation.relevant_fraction);
    inum("segmentation", "sweep_steps", cfg.segmentation.sweep_steps);

    flag("noise", "enabled", cfg.noise.enabled);
    num("noise", "i0", cfg.noise.i0);
    num("noise", "attenuation_scale", cfg.noise.attenuation_scale);

    bool default_caps = true;
    flag("reachability", "default_caps", default_caps);
    if (!default_caps) cfg.reachability.unreachable_caps.clear();
    for (const auto& cap : t.get_all("reachability", "cap")) {
        std::istringstream ss(cap);
        double theta_deg, phi_deg, radius_deg;
        if (!(ss >> theta_deg >> phi_deg >> radius_deg))
            throw std::runtime_error("bad cap line: " + cap);
        cfg.reachability.unreachable_caps.push_back(
            {direction_from_angles(deg_to_rad(theta_deg), deg_to_rad(phi_deg)), radius_deg});
    }
    num("reachability", "p_hardware", cfg.reachability.p_hardware);
    num("reachability", "p_calibration", cfg.reachability.p_calibration);

    if (t.has("run", "seed")) cfg.seed = std::stoull(t.get("run", "seed"));
    inum("run", "threads", cfg.threads);
    inum("run", "random_target", cfg.random_target);

    for (const auto& p : t.get_all("profiles", "profile")) {
        std::istringstream ss(p);
        ProfileSpec spec;
        std::string axis;
        if (!(ss >> spec.name >> axis >> spec.slice >> spec.a0 >> spec.b0 >> spec.a1 >> spec.b1))
            throw std::runtime_error("bad profile line: " + p);
        if (axis == "x") spec.axis = 0;
        else if (axis == "y") spec.axis = 1;
        else if (axis == "z") spec.axis = 2;
        else throw std::runtime_error("profile axis must be x, y or z");
        cfg.profiles.push_back(spec);
    }
    if (t.has("metrics", "aggregate")) {
        const std::string& a = t.get("metrics", "aggregate");
        if (a == "mean") cfg.metrics_aggregate = GradientAggregate::Mean;
        else if (a == "max") cfg.metrics_aggregate = GradientAggregate::Max;
        else if (a == "sum") cfg.metrics_aggregate = GradientAggregate::Sum;
        else throw std::runtime_error("metrics aggregate must be mean, max or sum");
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    return parse_experiment_config(is);
}

/// Canonical text form; parse(serialize(cfg)) == cfg.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    auto d = [&](double v) { return format_double(v); };
    os << "[phantom]\n";
    os << "sample = " << cfg.phantom.sample_id << "\n";
    os << "grid = " << cfg.phantom.grid << "\n";
    os << "world_mm = " << d(cfg.phantom.world_mm) << "\n";
    os << "mu_sample = " << d(cfg.phantom.mu_sample) << "\n";
    os << "mu_absorber = " << d(cfg.phantom.mu_absorber) << "\n";
    os << "mu_holder = " << d(cfg.phantom.mu_holder) << "\n";
    os << "mu_marker = " << d(cfg.phantom.mu_marker) << "\n";
    os << "plate_gap_mm = " << d(cfg.phantom.plate_gap_mm) << "\n";
    os << "absorber_scale = " << d(cfg.phantom.absorber_scale) << "\n";
    os << "holder_height_mm = " << d(cfg.phantom.holder_height_mm) << "\n";
    os << "holder_radius_mm = " << d(cfg.phantom.holder_radius_mm) << "\n";
    os << "marker_radius_mm = " << d(cfg.phantom.marker_radius_mm) << "\n";
    os << "marker_ring_radius_mm = " << d(cfg.phantom.marker_ring_radius_mm) << "\n";
    os << "marker_count = " << cfg.phantom.marker_count << "\n\n";
    os << "[detector]\n";
    os << "rows = " << cfg.detector.rows << "\n";
    os << "cols = " << cfg.detector.cols << "\n";
    os << "pixel_pitch_mm = " << d(cfg.detector.pixel_pitch) << "\n";
    os << "source_to_object_mm = " << d(cfg.detector.source_to_object) << "\n";
    os << "source_to_detector_mm = " << d(cfg.detector.source_to_detector) << "\n\n";
    os << "[sphere]\n";
    os << "n_side_low = " << cfg.n_side_low << "\n";
    os << "n_side_high = " << cfg.n_side_high << "\n";
    os << "baseline_n_side = " << cfg.baseline_n_side << "\n";
    os << "random_n_side = " << cfg.random_n_side << "\n\n";
    os << "[optimize]\n";
    os << "r_deg = " << d(cfg.r_deg) << "\n";
    os << "s = " << d(cfg.sampler.s) << "\n";
    os << "x_min = " << d(cfg.sampler.x_min) << "\n";
    os << "budget = " << cfg.budget << "\n";
    os << "spread_all_poses = " << (cfg.spread_all_poses ? "true" : "false") << "\n\n";
    os << "[recon]\n";
    os << "coarse_grid = " << cfg.coarse_grid << "\n";
    os << "coarse_iterations = " << cfg.coarse_iterations << "\n";
    os << "final_grid = " << cfg.final_grid << "\n";
    os << "final_iterations = " << cfg.final_iterations << "\n";
    os << "lambda = " << d(cfg.lambda) << "\n\n";
    os << "[segmentation]\n";
    os << "relevant_fraction = " << d(cfg.segmentation.relevant_fraction) << "\n";
    os << "sweep_steps = " << cfg.segmentation.sweep_steps << "\n\n";
    os << "[noise]\n";
    os << "enabled = " << (cfg.noise.enabled ? "true" : "false") << "\n";
    os << "i0 = " << d(cfg.noise.i0) << "\n";
    os << "attenuation_scale = " << d(cfg.noise.attenuation_scale) << "\n\n";
    os << "[reachability]\n";
    os << "default_caps = false\n";
    for (const auto& cap : cfg.reachability.unreachable_caps) {
        double theta = std::acos(std::clamp(cap.center.z, -1.0, 1.0));
        double phi = std::atan2(cap.center.y, cap.center.x);
        if (phi < 0) phi += kTwoPi;
        os << "cap = " << d(rad_to_deg(theta)) << ' ' << d(rad_to_deg(phi)) << ' '
           << d(cap.radius_deg) << "\n";
    }
    os << "p_hardware = " << d(cfg.reachability.p_hardware) << "\n";
    os << "p_calibration = " << d(cfg.reachability.p_calibration) << "\n\n";
    os << "[run]\n";
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "random_target = " << cfg.random_target << "\n\n";
    os << "[metrics]\n";
    os << "aggregate = "
       << (cfg.metrics_aggregate == GradientAggregate::Mean
               ? "mean"
               : (cfg.metrics_aggregate == GradientAggregate::Max ? "max" : "sum"))
       << "\n\n";
    os << "[profiles]\n";
    for (const auto& p : cfg.profiles) {
        const char* axis = p.axis == 0 ? "x" : (p.axis == 1 ? "y" : "z");
        os << "profile = " << p.name << ' ' << axis << ' ' << p.slice << ' ' << d(p.a0) << ' '
           << d(p.b0) << ' ' << d(p.a1) << ' ' << d(p.b1) << "\n";
    }
    return os.str();
}

/// Desk-scale experiment presets matching the shipped config files.
inline ExperimentConfig desk_config(int sample_id) {
    ExperimentConfig cfg;
    cfg.phantom = default_phantom_spec(sample_id, 96);
    cfg.detector = DetectorSpec{};
    if (sample_id == 2) cfg.detector.pixel_pitch = 1.0;
    cfg.n_side_low = 3;
    cfg.n_side_high = 18;
    cfg.baseline_n_side = 5;
    cfg.random_n_side = 19;
    cfg.r_deg = 5.0;
    cfg.sampler.s = 20.0;
    cfg.sampler.x_min = 1.0;
    cfg.budget = 150;
    cfg.coarse_grid = 48;
    cfg.coarse_iterations = 10;
    cfg.final_grid = 96;
    cfg.final_iterations = 30;
    cfg.segmentation.relevant_fraction = 6e-3;
    cfg.segmentation.sweep_steps = 32;
    cfg.noise.enabled = true;
    cfg.noise.i0 = 3e4;
    cfg.noise.attenuation_scale = 0.13;
    cfg.seed = 20240601;
    cfg.random_target = -1;
    if (sample_id == 1) {
        cfg.profiles = {
            {2, 45, 22.0, 47.5, 74.0, 47.5, "p1_cube_x"},
            {0, 47, 55.5, 3.5, 55.5, 80.0, "p2_stack_z"},
            {2, 60, 22.0, 47.5, 74.0, 47.5, "p3_cylinder_holes_x"},
        };
    } else {
        cfg.profiles = {
            {1, 47, 30.8, 7.5, 30.8, 87.5, "p1_across_box"},
            {1, 59, 39.2, 7.5, 39.2, 87.5, "p2_cube_hole"},
            {1, 34, 47.5, 7.5, 47.5, 87.5, "p3_cylinder_hole"},
        };
    }
    return cfg;
}

}  // namespace ctraj
