#include "c2nlos/geometry.hpp"

#include <algorithm>
#include <string>

namespace c2nlos {

double wrap_angle(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;  // fmod rounding can land exactly on 2*pi
    return w;
}

CartesianPoint spherical_to_cartesian(const SphericalPoint& p) {
    double s = std::sin(p.theta);
    return {p.r * s * std::cos(p.phi), p.r * s * std::sin(p.phi), p.r * std::cos(p.theta)};
}

SphericalPoint cartesian_to_spherical(const CartesianPoint& p) {
    SphericalPoint out;
    out.r = norm(p);
    if (out.r == 0.0) return out;
    out.theta = std::acos(std::clamp(p.z / out.r, -1.0, 1.0));
    if (p.x != 0.0 || p.y != 0.0) out.phi = wrap_angle(std::atan2(p.y, p.x));
    return out;
}

SinusoidParams scatterer_to_sinusoid(const SphericalPoint& p, const ScanCircle& circle) {
    SinusoidParams s;
    s.alpha = 2.0 * p.r * circle.radius * std::sin(p.theta);
    s.beta = wrap_angle(p.phi);
    s.gamma = p.r * p.r + circle.radius * circle.radius;
    return s;
}

SinusoidParams scatterer_to_sinusoid(const CartesianPoint& p, const ScanCircle& circle) {
    return scatterer_to_sinusoid(cartesian_to_spherical(p - circle.center), circle);
}

SphericalPoint sinusoid_to_scatterer(const SinusoidParams& s, const ScanCircle& circle) {
    double r2 = s.gamma - circle.radius * circle.radius;
    if (r2 < -1e-12 * std::max(1.0, std::abs(s.gamma)))
        throw InvalidSinusoid("gamma below radius^2: no scatterer at non-negative range");
    double r = std::sqrt(std::max(r2, 0.0));
    double denom = 2.0 * r * circle.radius;
    if (s.alpha > denom * (1.0 + 1e-12) + 1e-15)
        throw InvalidSinusoid("alpha exceeds 2*r*r': amplitude too large for this offset");
    if (s.alpha < 0.0) throw InvalidSinusoid("negative alpha");
    SphericalPoint p;
    p.r = r;
    p.theta = (denom > 0.0) ? std::asin(std::clamp(s.alpha / denom, 0.0, 1.0)) : 0.0;
    p.phi = wrap_angle(s.beta);
    return p;
}

double squared_range(const CartesianPoint& scatterer, const ScanCircle& circle, double scan_phi) {
    CartesianPoint d = scatterer - circle.point_at(scan_phi);
    return dot(d, d);
}

}  // namespace c2nlos
