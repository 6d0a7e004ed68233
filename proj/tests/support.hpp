#pragma once

// Shared helpers for the unit and acceptance suites. Oracles here are kept
// deliberately naive (direct formulas, O(n^2)/O(n!) scans) so they stay
// independent of the library implementations they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "c2nlos/array.hpp"
#include "c2nlos/geometry.hpp"

namespace support {

using c2nlos::CartesianPoint;
using c2nlos::ScanCircle;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Direct |x'(phi) - x|^2 with the scan point expanded by hand; checks the
// closed-form sinusoid against raw coordinates.
inline double brute_squared_range(const CartesianPoint& p, const ScanCircle& c, double phi) {
    double sx = c.center.x + c.radius * std::cos(phi);
    double sy = c.center.y + c.radius * std::sin(phi);
    double sz = c.center.z;
    double dx = p.x - sx, dy = p.y - sy, dz = p.z - sz;
    return dx * dx + dy * dy + dz * dz;
}

// Random hidden-scene point in front of the wall (z > 0), bounded range.
inline CartesianPoint random_scatterer(std::mt19937_64& rng, double rmin = 0.2, double rmax = 2.5) {
    double r = uniform(rng, rmin, rmax);
    double theta = uniform(rng, 0.01, c2nlos::kPi / 2 - 0.01);
    double phi = uniform(rng, 0.0, c2nlos::kTwoPi);
    return c2nlos::spherical_to_cartesian({r, theta, phi});
}

// Mean of |a_i - b_i| over a vector pairing.
inline double mean_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return a.empty() ? 0.0 : s / a.size();
}

inline double max_abs(const std::vector<float>& v) {
    double m = 0.0;
    for (float x : v) m = std::max(m, std::abs(static_cast<double>(x)));
    return m;
}

inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace support
