#pragma once

#include <cmath>

#include "c2nlos/errors.hpp"

namespace c2nlos {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Time-of-flight convention used throughout: distances in meters,
// times in seconds, c = 3e8 m/s.
inline constexpr double kSpeedOfLight = 3.0e8;

struct CartesianPoint {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline CartesianPoint operator+(CartesianPoint a, CartesianPoint b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline CartesianPoint operator-(CartesianPoint a, CartesianPoint b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline double dot(CartesianPoint a, CartesianPoint b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(CartesianPoint a) { return std::sqrt(dot(a, a)); }

// r >= 0, theta measured from the +z axis (the wall normal), phi around it.
struct SphericalPoint {
    double r = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

// Confocal scan locus: a circle of radius `radius` on the z = 0 wall,
// sampled at num_angles uniform angles 2*pi*k/num_angles.
struct ScanCircle {
    double radius = 0.5;
    CartesianPoint center{0.0, 0.0, 0.0};
    int num_angles = 360;

    double angle(int k) const { return kTwoPi * k / num_angles; }
    CartesianPoint point_at(double phi) const {
        return {center.x + radius * std::cos(phi), center.y + radius * std::sin(phi), center.z};
    }
    CartesianPoint point(int k) const { return point_at(angle(k)); }
};

// One scatterer's trace in the (scan angle, squared range) sinogram:
//   v(phi') = gamma - alpha * cos(beta - phi')
struct SinusoidParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

double wrap_angle(double phi);  // into [0, 2*pi)

CartesianPoint spherical_to_cartesian(const SphericalPoint& p);
SphericalPoint cartesian_to_spherical(const CartesianPoint& p);

// Maps a scatterer (spherical, relative to the scan circle center) to its
// sinusoid: alpha = 2 r r' sin(theta), beta = phi, gamma = r^2 + r'^2.
SinusoidParams scatterer_to_sinusoid(const SphericalPoint& p, const ScanCircle& circle);
SinusoidParams scatterer_to_sinusoid(const CartesianPoint& p, const ScanCircle& circle);

// Inverse map. Throws InvalidSinusoid when gamma < radius^2 or
// alpha > 2 r r' (no real scatterer traces such a curve).
SphericalPoint sinusoid_to_scatterer(const SinusoidParams& s, const ScanCircle& circle);

inline double sinusoid_value(const SinusoidParams& s, double scan_phi) {
    return s.gamma - s.alpha * std::cos(s.beta - scan_phi);
}

// Squared distance from the scan point at angle scan_phi to the scatterer,
// both in the circle's frame. Equals sinusoid_value for on-wall circles.
double squared_range(const CartesianPoint& scatterer, const ScanCircle& circle, double scan_phi);

}  // namespace c2nlos
