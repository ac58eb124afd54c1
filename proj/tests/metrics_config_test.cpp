#include <doctest.h>

#include <fstream>

#include "ctraj/config.hpp"
#include "ctraj/metrics.hpp"

using namespace ctraj;

namespace {

VoxelField make_field(int n, const std::function<float(int, int, int)>& fn) {
    VoxelField f(VolumeGeometry{n, n, n, 1.0});
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) f.at(i, j, k) = fn(i, j, k);
    return f;
}

}  // namespace

TEST_CASE("constant volume gives a constant profile and zero gradient") {
    VoxelField f = make_field(16, [](int, int, int) { return 3.5f; });
    ProfileSpec spec{2, 8, 2.0, 2.0, 13.0, 13.0, "diag"};
    LineProfile p = extract_profile(f, spec);
    for (double v : p.samples) CHECK(v == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(gradient_magnitude(p) <= 1e-12);  // trilinear round-off on a constant
}

TEST_CASE("axis-aligned profile reads exact voxel values") {
    VoxelField f = make_field(16, [](int i, int j, int k) {
        return static_cast<float>(i + 100 * j + 10000 * k);
    });
    // axis=2 (z slice): in-plane coords are (x, y)
    ProfileSpec spec{2, 5, 2.0, 7.0, 12.0, 7.0, "row"};
    LineProfile p = extract_profile(f, spec);
    REQUIRE(p.samples.size() == 11);
    for (int t = 0; t <= 10; ++t)
        CHECK(p.samples[t] == doctest::Approx(2 + t + 700 + 50000).epsilon(1e-12));
}

TEST_CASE("diagonal profile through a linear ramp is linear") {
    VoxelField f = make_field(24, [](int i, int j, int k) {
        return static_cast<float>(2.0 * i - 0.5 * j + 0.25 * k);
    });
    ProfileSpec spec{1, 7, 3.0, 2.0, 19.0, 18.0, "diag"};  // axis=1: (z, x) in-plane
    LineProfile p = extract_profile(f, spec);
    REQUIRE(p.samples.size() >= 3);
    double step = p.samples[1] - p.samples[0];
    for (std::size_t i = 1; i < p.samples.size(); ++i)
        CHECK(p.samples[i] - p.samples[i - 1] == doctest::Approx(step).epsilon(1e-6));
}

TEST_CASE("unit step edge yields gradient 1/(N-2)") {
    const int n = 32;
    VoxelField f = make_field(n, [](int i, int, int) { return i >= 16 ? 1.0f : 0.0f; });
    ProfileSpec spec{2, 4, 0.0, 9.0, 31.0, 9.0, "edge"};
    LineProfile p = extract_profile(f, spec);
    REQUIRE(p.samples.size() == 32);
    CHECK(gradient_magnitude(p) == doctest::Approx(1.0 / (32 - 2)).epsilon(1e-12));
    CHECK(gradient_magnitude(p, GradientAggregate::Max) == doctest::Approx(0.5));
    CHECK(gradient_magnitude(p, GradientAggregate::Sum) == doctest::Approx(1.0));
}

TEST_CASE("gradient magnitude invariances") {
    Rng rng(5);
    LineProfile p;
    p.samples.resize(40);
    for (auto& v : p.samples) v = rng.uniform();
    double g = gradient_magnitude(p);

    LineProfile rev = p;
    std::reverse(rev.samples.begin(), rev.samples.end());
    CHECK(gradient_magnitude(rev) == doctest::Approx(g).epsilon(1e-12));

    LineProfile shifted = p;
    for (auto& v : shifted.samples) v += 17.0;
    CHECK(gradient_magnitude(shifted) == doctest::Approx(g).epsilon(1e-9));

    LineProfile scaled = p;
    for (auto& v : scaled.samples) v *= 3.0;
    CHECK(gradient_magnitude(scaled) == doctest::Approx(3.0 * g).epsilon(1e-12));
}

TEST_CASE("profile validation") {
    VoxelField f = make_field(8, [](int, int, int) { return 0.0f; });
    CHECK_THROWS_AS(extract_profile(f, ProfileSpec{2, 20, 0, 0, 5, 5, ""}),
                    std::invalid_argument);
    CHECK_THROWS_AS(extract_profile(f, ProfileSpec{2, 4, 0, 0, 40, 40, ""}),
                    std::invalid_argument);
    CHECK_THROWS_AS(extract_profile(f, ProfileSpec{2, 4, 1, 1, 2, 1, ""}),
                    std::invalid_argument);  // too short
}

TEST_CASE("compare_runs computes percentage deltas") {
    // 0.000991 -> 0.002284 must report +130.5%
    double delta = 100.0 * (0.002284 - 0.000991) / 0.000991;
    CHECK(delta == doctest::Approx(130.5).epsilon(0.001));

    VoxelField a = make_field(16, [](int i, int, int) { return i >= 8 ? 1.0f : 0.0f; });
    VoxelField b = make_field(16, [](int i, int, int) { return i >= 8 ? 2.0f : 0.0f; });
    ProfileSpec spec{2, 8, 0.0, 8.0, 15.0, 8.0, "edge"};
    std::vector<const VoxelField*> runs{&a, &b};
    auto table = compare_runs(runs, std::span<const ProfileSpec>(&spec, 1));
    REQUIRE(table.size() == 1);
    CHECK(table[0].delta_pct[0] == 0.0);
    CHECK(table[0].delta_pct[1] == doctest::Approx(100.0).epsilon(1e-9));

    SUBCASE("identical volumes give zero deltas") {
        std::vector<const VoxelField*> same{&a, &a, &a};
        auto t2 = compare_runs(same, std::span<const ProfileSpec>(&spec, 1));
        for (double d : t2[0].delta_pct) CHECK(d == 0.0);
    }
    SUBCASE("mismatched grids are rejected") {
        VoxelField c = make_field(8, [](int, int, int) { return 0.0f; });
        std::vector<const VoxelField*> bad{&a, &c};
        CHECK_THROWS_AS(compare_runs(bad, std::span<const ProfileSpec>(&spec, 1)),
                        std::invalid_argument);
    }
}

TEST_CASE("config serialize/parse round-trip preserves everything") {
    ExperimentConfig cfg = desk_config(1);
    std::string text = serialize_config(cfg);
    std::istringstream is(text);
    ExperimentConfig back = parse_experiment_config(is);
    CHECK(serialize_config(back) == text);
    CHECK(back.phantom.sample_id == 1);
    CHECK(back.sampler.s == 20.0);
    CHECK(back.reachability.unreachable_caps.size() ==
          cfg.reachability.unreachable_caps.size());
    REQUIRE(back.profiles.size() == 3);
    CHECK(back.profiles[0].name == "p1_cube_x");
}

TEST_CASE("shipped config files match the presets") {
    for (int sample : {1, 2}) {
        std::string path = std::string(CTRAJ_SOURCE_DIR) + "/configs/sample" +
                           std::to_string(sample) + "_desk.cfg";
        ExperimentConfig file_cfg = load_experiment_config(path);
        CHECK(serialize_config(file_cfg) == serialize_config(desk_config(sample)));
    }
}

TEST_CASE("config parse errors are loud") {
    std::istringstream bad1("[phantom\nsample = 1\n");
    CHECK_THROWS(parse_experiment_config(bad1));
    std::istringstream bad2("[phantom]\nsample\n");
    CHECK_THROWS(parse_experiment_config(bad2));
    std::istringstream bad3("[optimize]\ns = heaps\n");
    CHECK_THROWS(parse_experiment_config(bad3));
    std::istringstream bad4("[reachability]\ncap = 10 20\n");
    CHECK_THROWS(parse_experiment_config(bad4));
}

TEST_CASE("comments, blanks and repeated keys parse") {
    std::istringstream is(
        "# experiment\n\n[sphere]\nn_side_low = 2  # coarse\nn_side_high = 6\n"
        "[reachability]\ndefault_caps = false\ncap = 10 20 15\ncap = 100 200 25\n");
    ExperimentConfig cfg = parse_experiment_config(is);
    CHECK(cfg.n_side_low == 2);
    CHECK(cfg.n_side_high == 6);
    REQUIRE(cfg.reachability.unreachable_caps.size() == 2);
    CHECK(cfg.reachability.unreachable_caps[1].radius_deg == 25.0);
}
