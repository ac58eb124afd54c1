#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "ctraj/score_map.hpp"
#include "ctraj/sphere_grid.hpp"

using namespace ctraj;

namespace {

// Independent transcription of the ring-scheme pixel centers: walk the rings
// from the north pole instead of inverting the index arithmetic. Used as the
// oracle for pixel_center.
std::vector<SphereDirection> ring_walk_centers(int n) {
    std::vector<SphereDirection> out;
    for (int ring = 1; ring <= 4 * n - 1; ++ring) {
        int count;
        double z;
        double offset;  // in units of the in-ring pixel spacing
        if (ring < n) {  // north cap
            count = 4 * ring;
            z = 1.0 - static_cast<double>(ring) * ring / (3.0 * n * n);
            offset = 0.5;
        } else if (ring <= 3 * n) {  // belt
            count = 4 * n;
            z = 4.0 / 3.0 - 2.0 * ring / (3.0 * n);
            offset = ((ring + n) % 2 == 0) ? 0.5 : 1.0;
        } else {  // south cap
            int mirror = 4 * n - ring;
            count = 4 * mirror;
            z = -(1.0 - static_cast<double>(mirror) * mirror / (3.0 * n * n));
            offset = 0.5;
        }
        for (int j = 1; j <= count; ++j) {
            double phi = (j - offset) * kTwoPi / count;
            if (phi >= kTwoPi) phi -= kTwoPi;
            out.push_back({std::acos(z), phi});
        }
    }
    return out;
}

Vec3 random_unit(Rng& rng) {
    double z = 2.0 * rng.uniform() - 1.0;
    double phi = kTwoPi * rng.uniform();
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

TEST_CASE("num_pixels matches 12 n^2") {
    CHECK(num_pixels(1) == 12);
    CHECK(num_pixels(2) == 48);
    CHECK(num_pixels(3) == 108);
    CHECK(num_pixels(9) == 972);
    CHECK(num_pixels(18) == 3888);
    CHECK_THROWS_AS(num_pixels(0), std::invalid_argument);
}

TEST_CASE("pixel centers match the ring-walk oracle") {
    for (int n : {1, 2, 3, 5, 9}) {
        SpherePartition p(n);
        auto oracle = ring_walk_centers(n);
        REQUIRE(oracle.size() == p.n_pix());
        for (PixelId id = 0; id < p.n_pix(); ++id) {
            auto c = p.pixel_center(id);
            CHECK(c.theta == doctest::Approx(oracle[id].theta).epsilon(1e-12));
            CHECK(c.phi == doctest::Approx(oracle[id].phi).epsilon(1e-12));
        }
    }
}

TEST_CASE("n_side=1 reference centers") {
    SpherePartition p(1);
    auto c0 = p.pixel_center(0);
    CHECK(c0.theta == doctest::Approx(std::acos(2.0 / 3.0)).epsilon(1e-14));
    CHECK(c0.phi == doctest::Approx(kPi / 4.0).epsilon(1e-14));
    auto c4 = p.pixel_center(4);  // equatorial ring
    CHECK(c4.theta == doctest::Approx(kPi / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(p.pixel_center(12), std::out_of_range);
}

TEST_CASE("pixel center survives a Monte-Carlo centroid cross-check") {
    // the area centroid of a pixel must point back into that pixel and lie
    // close to the formula center
    SpherePartition p(1);
    Rng rng(7);
    Vec3 centroid{};
    int hits = 0;
    for (int i = 0; i < 200000; ++i) {
        Vec3 d = random_unit(rng);
        if (p.ang_to_pixel(d) == 0) {
            centroid = centroid + d;
            ++hits;
        }
    }
    CHECK(hits > 0);
    centroid = centroid * (1.0 / hits);
    Vec3 c = p.pixel_center_vec(0);
    double angle = std::acos(std::clamp(centroid.normalized().dot(c), -1.0, 1.0));
    CHECK(angle < 0.1);  // radians; pixel radius at n_side=1 is ~0.6 rad
    // every pixel collects ~1/12 of uniform samples
    CHECK(hits == doctest::Approx(200000.0 / 12.0).epsilon(0.05));
}

TEST_CASE("ang_to_pixel round-trips every pixel center") {
    for (int n : {1, 2, 3, 5, 9}) {
        SpherePartition p(n);
        for (PixelId id = 0; id < p.n_pix(); ++id) {
            auto c = p.pixel_center(id);
            CHECK(p.ang_to_pixel(c.theta, c.phi) == id);
            CHECK(p.ang_to_pixel(p.pixel_center_vec(id)) == id);
        }
    }
}

TEST_CASE("poles resolve deterministically") {
    SpherePartition p(1);
    CHECK(p.ang_to_pixel(0.0, 0.0) == 0);
    CHECK(p.ang_to_pixel(Vec3{0, 0, 1}) == 0);
    CHECK(p.ang_to_pixel(kPi, 0.0) == p.n_pix() - 4);
    CHECK(p.ang_to_pixel(Vec3{0, 0, -1}) == p.n_pix() - 4);
}

TEST_CASE("uniform directions spread evenly over pixels") {
    SpherePartition p(3);
    Rng rng(42);
    const int samples = 100000;
    std::vector<int> counts(p.n_pix(), 0);
    for (int i = 0; i < samples; ++i) ++counts[p.ang_to_pixel(random_unit(rng))];

    double prob = 1.0 / p.n_pix();
    double expected = samples * prob;
    double sigma = std::sqrt(samples * prob * (1 - prob));
    double chi2 = 0.0;
    for (int c : counts) {
        CHECK(std::abs(c - expected) <= 5.0 * sigma);  // binomial 5-sigma band
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // 99.9% quantile of chi-square with 107 dof (Wilson-Hilferty): ~183.6
    CHECK(chi2 < 183.6);
}

TEST_CASE("query_disc equals brute force and handles edge radii") {
    Rng rng(3);
    for (int n : {3, 18}) {
        SpherePartition p(n);
        for (int trial = 0; trial < 20; ++trial) {
            Vec3 c = random_unit(rng);
            double radius = 180.0 * rng.uniform();
            auto got = p.query_disc(c, radius);

            std::set<PixelId> expect;
            double cos_r = std::cos(deg_to_rad(radius));
            for (PixelId id = 0; id < p.n_pix(); ++id)
                if (p.pixel_center_vec(id).dot(c) >= cos_r) expect.insert(id);
            expect.insert(p.ang_to_pixel(c));

            CHECK(std::set<PixelId>(got.begin(), got.end()) == expect);
        }
        Vec3 c = random_unit(rng);
        CHECK(p.query_disc(c, 180.0).size() == p.n_pix());
        auto self = p.query_disc(p.pixel_center_vec(5), 0.0);
        REQUIRE(self.size() == 1);
        CHECK(self[0] == 5);
    }
}

TEST_CASE("disc counts near a 4000-pixel density match the area fraction") {
    SpherePartition p(19);  // 4332 pixels
    Rng rng(11);
    for (double r : {5.0, 10.0, 15.0}) {
        double total = 0;
        const int trials = 50;
        for (int t = 0; t < trials; ++t) total += p.query_disc(random_unit(rng), r).size();
        double expected = p.n_pix() * (1.0 - std::cos(deg_to_rad(r))) / 2.0;
        CHECK(total / trials == doctest::Approx(expected).epsilon(0.15));
    }
}

TEST_CASE("score map state/score bookkeeping") {
    SphereScoreMap map((SpherePartition(1)));
    map.set_acquired(3, 118);
    CHECK(map.state(3) == PoseState::Acquired);
    CHECK(*map.score(3) == 118);
    map.set_state(4, PoseState::Unreachable);
    CHECK_THROWS_AS(map.set_score(4, 5), std::logic_error);
    map.set_score(5, 7);  // untried pixels may carry transferred scores
    CHECK(map.state(5) == PoseState::Untried);
    map.set_state(5, PoseState::Failed);
    CHECK(!map.score(5));  // failing clears the score
}

TEST_CASE("transfer_scores maps regions, states and scores") {
    SpherePartition low(3), high(18);
    SphereScoreMap lmap(low);
    for (PixelId i = 0; i < low.n_pix(); ++i) lmap.set_state(i, PoseState::Unreachable);

    SUBCASE("all unreachable stays all unreachable") {
        auto hmap = transfer_scores(lmap, high);
        CHECK(hmap.count_state(PoseState::Unreachable) == high.n_pix());
    }

    SUBCASE("an acquired pixel seeds untried children carrying its score") {
        lmap.set_state(40, PoseState::Untried);
        lmap.set_acquired(40, 118);
        auto hmap = transfer_scores(lmap, high);

        // oracle: count dense pixels whose center lands in low pixel 40
        std::size_t children = 0;
        for (PixelId i = 0; i < high.n_pix(); ++i) {
            auto c = high.pixel_center(i);
            if (low.ang_to_pixel(c.theta, c.phi) == 40) ++children;
        }
        double ratio = static_cast<double>(high.n_pix()) / low.n_pix();
        CHECK(children == doctest::Approx(ratio).epsilon(0.35));

        std::size_t scored = 0;
        for (PixelId i = 0; i < high.n_pix(); ++i) {
            if (hmap.score(i)) {
                CHECK(*hmap.score(i) == 118);
                CHECK(hmap.state(i) == PoseState::Untried);
                ++scored;
            }
        }
        CHECK(scored == children);
    }

    SUBCASE("idempotent under re-transfer with the same partition") {
        lmap.set_state(2, PoseState::Untried);
        lmap.set_acquired(2, 9);
        lmap.set_state(50, PoseState::Failed);
        auto h1 = transfer_scores(lmap, high);
        auto h2 = transfer_scores(h1, high);
        for (PixelId i = 0; i < high.n_pix(); ++i) {
            CHECK(h1.state(i) == h2.state(i));
            CHECK(h1.score(i) == h2.score(i));
        }
    }
}

TEST_CASE("score map csv round-trip") {
    SpherePartition p(2);
    SphereScoreMap map(p);
    map.set_acquired(0, 42);
    map.set_state(1, PoseState::Unreachable);
    map.set_state(2, PoseState::Failed);
    map.set_score(3, 7);

    std::stringstream ss;
    map.write_csv(ss);
    auto back = SphereScoreMap::read_csv(ss);
    REQUIRE(back.n_pix() == map.n_pix());
    for (PixelId i = 0; i < map.n_pix(); ++i) {
        CHECK(back.state(i) == map.state(i));
        CHECK(back.score(i) == map.score(i));
    }
}
