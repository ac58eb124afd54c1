// Equal-area iso-latitude pixelization of the unit sphere (ring ordering),
// implemented from the standard closed-form ring-scheme formulas. A grid of resolution
// n_side has 12*n_side^2 pixels of equal solid angle, arranged on 4*n_side-1
// iso-latitude rings: polar cap rings of 4*i pixels and an equatorial belt of
// 4*n_side pixels per ring.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctraj/common.hpp"

namespace ctraj {

using PixelId = std::uint32_t;

inline std::uint64_t num_pixels(int n_side) {
    if (n_side < 1) throw std::invalid_argument("n_side must be >= 1");
    return 12ull * static_cast<std::uint64_t>(n_side) * static_cast<std::uint64_t>(n_side);
}

namespace detail {
inline std::uint64_t isqrt(std::uint64_t v) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}
}  // namespace detail

struct SphereDirection {
    double theta = 0;  // colatitude, [0, pi]
    double phi = 0;    // azimuth, [0, 2*pi)
};

class SpherePartition {
  public:
    explicit SpherePartition(int n_side) : n_side_(n_side), n_pix_(num_pixels(n_side)) {}

    int n_side() const { return n_side_; }
    std::uint32_t n_pix() const { return static_cast<std::uint32_t>(n_pix_); }

    /// Solid angle of every pixel, steradians.
    double pixel_area() const { return 4.0 * kPi / static_cast<double>(n_pix_); }

    SphereDirection pixel_center(PixelId id) const {
        if (id >= n_pix_) throw std::out_of_range("pixel id out of range");
        const std::uint64_t n = n_side_;
        const std::uint64_t ncap = 2 * n * (n - 1);
        const double z_unit = 1.0 / (3.0 * static_cast<double>(n * n));
        double z, phi;
        if (id < ncap) {  // north polar cap
            std::uint64_t ring = (1 + detail::isqrt(1 + 2ull * id)) / 2;
            std::uint64_t iphi = id + 1 - 2 * ring * (ring - 1);
            z = 1.0 - static_cast<double>(ring * ring) * z_unit;
            phi = (static_cast<double>(iphi) - 0.5) * kPi / (2.0 * static_cast<double>(ring));
        } else if (id < n_pix_ - ncap) {  // equatorial belt
            std::uint64_t ip = id - ncap;
            std::uint64_t ring = ip / (4 * n) + n;
            std::uint64_t iphi = ip % (4 * n) + 1;
            double fodd = ((ring + n) & 1) ? 1.0 : 0.5;
            z = (2.0 * static_cast<double>(n) - static_cast<double>(ring)) * 2.0 /
                (3.0 * static_cast<double>(n));
            phi = (static_cast<double>(iphi) - fodd) * kPi / (2.0 * static_cast<double>(n));
        } else {  // south polar cap
            std::uint64_t ip = n_pix_ - id;
            std::uint64_t ring = (1 + detail::isqrt(2 * ip - 1)) / 2;
            std::uint64_t iphi = 4 * ring + 1 - (ip - 2 * ring * (ring - 1));
            z = -1.0 + static_cast<double>(ring * ring) * z_unit;
            phi = (static_cast<double>(iphi) - 0.5) * kPi / (2.0 * static_cast<double>(ring));
        }
        if (phi >= kTwoPi) phi -= kTwoPi;
        return {std::acos(std::clamp(z, -1.0, 1.0)), phi};
    }

    Vec3 pixel_center_vec(PixelId id) const {
        auto [theta, phi] = pixel_center(id);
        return direction_from_angles(theta, phi);
    }

    /// Pixel whose area contains (theta, phi). Every direction is covered;
    /// boundary directions resolve by the floor semantics of the closed-form
    /// assignment (deterministic). The poles land in the cap pixel whose
    /// azimuth quadrant contains phi; a pole given as a vector maps to phi=0,
    /// i.e. pixel 0 (north) / n_pix-4 (south).
    PixelId ang_to_pixel(double theta, double phi) const {
        if (theta < 0.0 || theta > kPi) throw std::invalid_argument("theta outside [0, pi]");
        const std::int64_t n = n_side_;
        const double z = std::cos(theta);
        const double za = std::fabs(z);
        double tt = std::fmod(phi, kTwoPi);
        if (tt < 0) tt += kTwoPi;
        tt /= (kPi / 2.0);  // in [0, 4)

        if (za <= 2.0 / 3.0) {  // equatorial belt
            double temp1 = n * (0.5 + tt);
            double temp2 = n * (z * 0.75);
            auto jp = static_cast<std::int64_t>(std::floor(temp1 - temp2));
            auto jm = static_cast<std::int64_t>(std::floor(temp1 + temp2));
            std::int64_t ir = n + 1 + jp - jm;  // ring counted from z = 2/3, odd ir on-center
            std::int64_t kshift = 1 - (ir & 1);
            std::int64_t t1 = jp + jm - n + kshift + 1;
            std::int64_t ip = (t1 >= 0 ? t1 / 2 : (t1 - 1) / 2) % (4 * n);
            if (ip < 0) ip += 4 * n;
            return static_cast<PixelId>(2 * n * (n - 1) + (ir - 1) * 4 * n + ip);
        }
        // polar caps
        double tp = tt - std::floor(tt);
        double tmp = n * std::sqrt(3.0 * (1.0 - za));
        auto jp = static_cast<std::int64_t>(tp * tmp);
        auto jm = static_cast<std::int64_t>((1.0 - tp) * tmp);
        std::int64_t ir = jp + jm + 1;  // ring counted from the nearest pole
        if (ir > n) ir = n;
        std::int64_t ip = static_cast<std::int64_t>(tt * static_cast<double>(ir)) % (4 * ir);
        if (ip < 0) ip += 4 * ir;
        if (z > 0) return static_cast<PixelId>(2 * ir * (ir - 1) + ip);
        return static_cast<PixelId>(static_cast<std::int64_t>(n_pix_) - 2 * ir * (ir + 1) + ip);
    }

    PixelId ang_to_pixel(const Vec3& dir) const {
        Vec3 u = dir.normalized();
        double theta = std::acos(std::clamp(u.z, -1.0, 1.0));
        double phi = std::atan2(u.y, u.x);
        if (phi < 0) phi += kTwoPi;
        return ang_to_pixel(theta, phi);
    }

    /// All pixels whose centers lie within `radius_deg` of `center` (great-
    /// circle distance), plus the pixel containing `center` itself. Sorted.
    std::vector<PixelId> query_disc(const Vec3& center, double radius_deg) const {
        if (radius_deg < 0.0 || radius_deg > 180.0)
            throw std::invalid_argument("disc radius must be in [0, 180] degrees");
        Vec3 c = center.normalized();
        std::vector<PixelId> out;
        if (radius_deg >= 180.0) {
            out.resize(n_pix());
            for (std::uint32_t i = 0; i < n_pix(); ++i) out[i] = i;
            return out;
        }
        const double cos_r = std::cos(deg_to_rad(radius_deg));
        for (std::uint32_t i = 0; i < n_pix(); ++i)
            if (pixel_center_vec(i).dot(c) >= cos_r) out.push_back(i);
        PixelId host = ang_to_pixel(c);
        auto it = std::lower_bound(out.begin(), out.end(), host);
        if (it == out.end() || *it != host) out.insert(it, host);
        return out;
    }

    bool operator==(const SpherePartition& o) const { return n_side_ == o.n_side_; }

  private:
    int n_side_;
    std::uint64_t n_pix_;
};

}  // namespace ctraj
