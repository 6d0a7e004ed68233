#pragma once

#include <cstdint>
#include <vector>

#include "c2nlos/array.hpp"
#include "c2nlos/geometry.hpp"

namespace c2nlos {

struct Scatterer {
    CartesianPoint position;
    double albedo = 1.0;
};

struct Scene {
    std::vector<Scatterer> scatterers;
};

void validate_scene(const Scene& scene);

struct TimeAxis {
    int num_bins = 2048;
    double bin_width = 16e-12;  // seconds

    double time_of_bin(int i) const { return i * bin_width; }
    double duration() const { return num_bins * bin_width; }
    // one-way range covered by the axis; returns at 2d/c
    double max_range() const { return duration() * kSpeedOfLight / 2.0; }
    double v_max() const { return max_range() * max_range(); }
};

// Wall sample grid on z = 0: nx * ny positions, inclusive of the extent edges.
struct GridSpec {
    int nx = 64;
    int ny = 64;
    double width = 2.0;   // meters
    double height = 2.0;  // meters
    CartesianPoint center{0.0, 0.0, 0.0};

    double x(int i) const { return center.x - width / 2.0 + i * width / (nx - 1); }
    double y(int j) const { return center.y - height / 2.0 + j * height / (ny - 1); }
};

enum class AxisKind { Time, V };

// Full confocal grid scan. data[y][x][bin].
struct ConfocalTransient {
    Array3D<float> data;
    GridSpec grid;
    TimeAxis time_axis;
    AxisKind axis_kind = AxisKind::Time;
    double v_max = 0.0;  // set when axis_kind == V

    int bins() const { return data.n2; }
    double dv() const { return v_max / (bins() - 1); }
};

// Circular confocal scan. data[angle][bin].
struct TransientSinogram {
    Array2D<float> data;
    ScanCircle circle;
    TimeAxis time_axis;
    AxisKind axis_kind = AxisKind::Time;
    double v_max = 0.0;

    int num_angles() const { return data.rows; }
    int bins() const { return data.cols; }
    double dv() const { return v_max / (bins() - 1); }
    double v_of_bin(int i) const { return i * dv(); }
};

// Brute-force transient render: each scatterer deposits albedo/d^4 at
// t = 2d/c, linearly split across the two nearest bins.
ConfocalTransient simulate_confocal(const Scene& scene, const GridSpec& grid, const TimeAxis& axis);
TransientSinogram simulate_sinogram(const Scene& scene, const ScanCircle& circle, const TimeAxis& axis);

// Change of variables t -> v = (tc/2)^2 with the v^{3/2} radiometric
// rescale. Output sampled on a uniform v grid over [0, (nt*dt*c/2)^2];
// bins_out = 0 keeps the input bin count.
TransientSinogram resample_to_v(const TransientSinogram& sino, int bins_out = 0);
ConfocalTransient resample_to_v(const ConfocalTransient& ct, int bins_out = 0);

// Bilinear interpolation of the grid scan at each circle angle; the
// row-stochastic sampling operator that this mirrors lives in recon3d.
TransientSinogram subsample_circle(const ConfocalTransient& ct, const ScanCircle& circle);

TransientSinogram add_poisson_noise(const TransientSinogram& sino, double scale, double dark_rate,
                                    std::uint64_t seed);
ConfocalTransient add_poisson_noise(const ConfocalTransient& ct, double scale, double dark_rate,
                                    std::uint64_t seed);

}  // namespace c2nlos
