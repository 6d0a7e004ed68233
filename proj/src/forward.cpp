#include "c2nlos/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "c2nlos/errors.hpp"
#include "c2nlos/parallel.hpp"

namespace c2nlos {

namespace {

void check_axis(const TimeAxis& axis) {
    if (axis.num_bins < 2 || axis.bin_width <= 0.0) throw Error("bad time axis");
}

// Two-bin linear splat at fractional bin u.
inline void splat(float* row, int nbins, double u, double value) {
    int i0 = static_cast<int>(std::floor(u));
    double f = u - i0;
    if (i0 >= 0 && i0 < nbins) row[i0] += static_cast<float>(value * (1.0 - f));
    if (i0 + 1 >= 0 && i0 + 1 < nbins) row[i0 + 1] += static_cast<float>(value * f);
}

inline double lerp_row(const float* row, int nbins, double u) {
    if (u < 0.0 || u > nbins - 1) return 0.0;
    int i0 = static_cast<int>(std::floor(u));
    if (i0 >= nbins - 1) return row[nbins - 1];
    double f = u - i0;
    return row[i0] * (1.0 - f) + row[i0 + 1] * f;
}

void render_position(const Scene& scene, const CartesianPoint& wall, const TimeAxis& axis,
                     float* row) {
    for (const Scatterer& s : scene.scatterers) {
        CartesianPoint d = s.position - wall;
        double dist = norm(d);
        if (dist <= 0.0) throw Error("scatterer coincides with a wall sample");
        double t = 2.0 * dist / kSpeedOfLight;
        double u = t / axis.bin_width;
        double d2 = dist * dist;
        splat(row, axis.num_bins, u, s.albedo / (d2 * d2));
    }
}

// The splat touches bin floor(u)+1, so the farthest return must satisfy
// u+1 <= nbins-1.
void check_range_bin(double dmax, std::size_t scatterer_idx, const TimeAxis& axis) {
    double u = 2.0 * dmax / kSpeedOfLight / axis.bin_width;
    if (u + 1.0 > axis.num_bins - 1)
        throw RangeOverflow("scatterer " + std::to_string(scatterer_idx) +
                            " return time exceeds the time axis");
}

// Integral of the piecewise-linear row over [0, u], u in bin units.
double integrate_row(const float* row, const std::vector<double>& prefix, int nt, double u) {
    if (u <= 0.0) return 0.0;
    if (u >= nt - 1) return prefix[nt - 1];
    int i0 = static_cast<int>(u);
    double f = u - i0;
    return prefix[i0] + f * row[i0] + 0.5 * f * f * (row[i0 + 1] - row[i0]);
}

// v-resample core shared by both measurement types. Each output bin
// averages the time signal over the footprint of its v interval instead
// of point-sampling it: near v = 0 the v grid is coarser than the time
// grid, and a narrow pulse would otherwise fall between sample points.
void resample_rows(const float* in, float* out, int nt, int nv, double dt, double v_max) {
    double dv = v_max / (nv - 1);
    double inv_c_dt = 2.0 / (kSpeedOfLight * dt);
    std::vector<double> prefix(nt, 0.0);
    for (int i = 1; i < nt; ++i) prefix[i] = prefix[i - 1] + 0.5 * (in[i - 1] + in[i]);
    for (int j = 0; j < nv; ++j) {
        double v = j * dv;
        double u_lo = std::sqrt(std::max(0.0, v - 0.5 * dv)) * inv_c_dt;
        double u_hi = std::sqrt(v + 0.5 * dv) * inv_c_dt;
        double val;
        if (u_hi - u_lo > 1e-9)
            val = (integrate_row(in, prefix, nt, u_hi) - integrate_row(in, prefix, nt, u_lo)) /
                  (u_hi - u_lo);
        else
            val = lerp_row(in, nt, std::sqrt(v) * inv_c_dt);
        out[j] = static_cast<float>(val * v * std::sqrt(v));
    }
}

}  // namespace

void validate_scene(const Scene& scene) {
    for (const Scatterer& s : scene.scatterers) {
        if (!(s.albedo >= 0.0) || !std::isfinite(s.albedo)) throw Error("scene albedo must be >= 0");
        if (!(s.position.z > 0.0)) throw Error("scene scatterers must have z > 0");
        if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y) ||
            !std::isfinite(s.position.z))
            throw Error("non-finite scatterer position");
    }
}

ConfocalTransient simulate_confocal(const Scene& scene, const GridSpec& grid, const TimeAxis& axis) {
    check_axis(axis);
    validate_scene(scene);
    if (grid.nx < 2 || grid.ny < 2) throw Error("grid needs at least 2x2 samples");

    // farthest grid point from a scatterer is one of the four corners
    for (std::size_t s = 0; s < scene.scatterers.size(); ++s) {
        double dmax = 0.0;
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx) {
                CartesianPoint corner{grid.x(cx * (grid.nx - 1)), grid.y(cy * (grid.ny - 1)),
                                      grid.center.z};
                dmax = std::max(dmax, norm(scene.scatterers[s].position - corner));
            }
        check_range_bin(dmax, s, axis);
    }

    ConfocalTransient out;
    out.grid = grid;
    out.time_axis = axis;
    out.data = Array3D<float>(grid.ny, grid.nx, axis.num_bins);
    parallel_for(grid.ny, [&](int lo, int hi) {
        for (int j = lo; j < hi; ++j)
            for (int i = 0; i < grid.nx; ++i)
                render_position(scene, {grid.x(i), grid.y(j), grid.center.z}, axis, out.data.row(j, i));
    });
    return out;
}

TransientSinogram simulate_sinogram(const Scene& scene, const ScanCircle& circle,
                                    const TimeAxis& axis) {
    check_axis(axis);
    validate_scene(scene);
    if (circle.num_angles < 3 || circle.radius <= 0.0) throw Error("bad scan circle");

    // farthest circle point lies diametrically opposite the scatterer's
    // transverse direction: distance^2 = (rho_xy + r')^2 + dz^2
    for (std::size_t s = 0; s < scene.scatterers.size(); ++s) {
        const CartesianPoint& p = scene.scatterers[s].position;
        double dx = p.x - circle.center.x;
        double dy = p.y - circle.center.y;
        double dz = p.z - circle.center.z;
        double rho = std::sqrt(dx * dx + dy * dy) + circle.radius;
        check_range_bin(std::sqrt(rho * rho + dz * dz), s, axis);
    }

    TransientSinogram out;
    out.circle = circle;
    out.time_axis = axis;
    out.data = Array2D<float>(circle.num_angles, axis.num_bins);
    parallel_for(circle.num_angles, [&](int lo, int hi) {
        for (int k = lo; k < hi; ++k) render_position(scene, circle.point(k), axis, out.data.row(k));
    });
    return out;
}

TransientSinogram resample_to_v(const TransientSinogram& sino, int bins_out) {
    if (sino.axis_kind != AxisKind::Time) throw Error("resample_to_v expects a time-axis input");
    int nv = bins_out > 0 ? bins_out : sino.bins();
    if (nv < 2) throw Error("resample_to_v needs >= 2 output bins");
    TransientSinogram out;
    out.circle = sino.circle;
    out.time_axis = sino.time_axis;
    out.axis_kind = AxisKind::V;
    out.v_max = sino.time_axis.v_max();
    out.data = Array2D<float>(sino.num_angles(), nv);
    for (int k = 0; k < sino.num_angles(); ++k)
        resample_rows(sino.data.row(k), out.data.row(k), sino.bins(), nv, sino.time_axis.bin_width,
                      out.v_max);
    return out;
}

ConfocalTransient resample_to_v(const ConfocalTransient& ct, int bins_out) {
    if (ct.axis_kind != AxisKind::Time) throw Error("resample_to_v expects a time-axis input");
    int nv = bins_out > 0 ? bins_out : ct.bins();
    if (nv < 2) throw Error("resample_to_v needs >= 2 output bins");
    ConfocalTransient out;
    out.grid = ct.grid;
    out.time_axis = ct.time_axis;
    out.axis_kind = AxisKind::V;
    out.v_max = ct.time_axis.v_max();
    out.data = Array3D<float>(ct.grid.ny, ct.grid.nx, nv);
    parallel_for(ct.grid.ny, [&](int lo, int hi) {
        for (int j = lo; j < hi; ++j)
            for (int i = 0; i < ct.grid.nx; ++i)
                resample_rows(ct.data.row(j, i), out.data.row(j, i), ct.bins(), nv,
                              ct.time_axis.bin_width, out.v_max);
    });
    return out;
}

TransientSinogram subsample_circle(const ConfocalTransient& ct, const ScanCircle& circle) {
    const GridSpec& g = ct.grid;
    double dx = g.width / (g.nx - 1);
    double dy = g.height / (g.ny - 1);
    TransientSinogram out;
    out.circle = circle;
    out.time_axis = ct.time_axis;
    out.axis_kind = ct.axis_kind;
    out.v_max = ct.v_max;
    out.data = Array2D<float>(circle.num_angles, ct.bins());
    for (int k = 0; k < circle.num_angles; ++k) {
        CartesianPoint p = circle.point(k);
        double fx = (p.x - g.x(0)) / dx;
        double fy = (p.y - g.y(0)) / dy;
        if (fx < 0.0 || fx > g.nx - 1 || fy < 0.0 || fy > g.ny - 1)
            throw CircleOutOfBounds("circle angle " + std::to_string(k) + " leaves the scanned grid");
        int ix = std::min(static_cast<int>(fx), g.nx - 2);
        int iy = std::min(static_cast<int>(fy), g.ny - 2);
        double ax = fx - ix, ay = fy - iy;
        double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay);
        double w01 = (1 - ax) * ay, w11 = ax * ay;
        const float* r00 = ct.data.row(iy, ix);
        const float* r10 = ct.data.row(iy, ix + 1);
        const float* r01 = ct.data.row(iy + 1, ix);
        const float* r11 = ct.data.row(iy + 1, ix + 1);
        float* dst = out.data.row(k);
        for (int t = 0; t < ct.bins(); ++t)
            dst[t] = static_cast<float>(w00 * r00[t] + w10 * r10[t] + w01 * r01[t] + w11 * r11[t]);
    }
    return out;
}

namespace {

void poisson_rows(float* data, std::size_t n, double scale, double dark_rate, std::uint64_t seed) {
    if (scale <= 0.0) throw Error("poisson scale must be > 0");
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double lambda = scale * data[i] + dark_rate;
        if (lambda <= 0.0) {
            data[i] = 0.0f;
            continue;
        }
        std::poisson_distribution<long> dist(lambda);
        data[i] = static_cast<float>(dist(rng));
    }
}

}  // namespace

TransientSinogram add_poisson_noise(const TransientSinogram& sino, double scale, double dark_rate,
                                    std::uint64_t seed) {
    TransientSinogram out = sino;
    poisson_rows(out.data.v.data(), out.data.size(), scale, dark_rate, seed);
    return out;
}

ConfocalTransient add_poisson_noise(const ConfocalTransient& ct, double scale, double dark_rate,
                                    std::uint64_t seed) {
    ConfocalTransient out = ct;
    poisson_rows(out.data.v.data(), out.data.size(), scale, dark_rate, seed);
    return out;
}

}  // namespace c2nlos
