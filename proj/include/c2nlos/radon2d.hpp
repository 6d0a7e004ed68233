#pragma once

#include <vector>

#include "c2nlos/array.hpp"
#include "c2nlos/forward.hpp"
#include "c2nlos/geometry.hpp"

namespace c2nlos {

// Band of the v-axis sinogram around a chosen focus radius. The window is
// [(r-r')^2, (r+r')^2] so every sinusoid of a scatterer at range r_est fits
// exactly; gamma = r_est^2 + r'^2 sits at the middle sample. Columns are the
// detector coordinate s = v - gamma in [-2 r r', +2 r r'].
struct CroppedSinogram {
    Array2D<float> data;  // [num_angles][num_v_crop], num_v_crop odd
    double focus_radius = 0.0;
    double window_lo = 0.0;  // (r - r')^2
    double window_hi = 0.0;  // (r + r')^2
    ScanCircle circle;

    int num_angles() const { return data.rows; }
    int bins() const { return data.cols; }
    double ds() const { return (window_hi - window_lo) / (data.cols - 1); }
    double s_of_bin(int i) const { return window_lo - gamma() + i * ds(); }
    double gamma() const { return 0.5 * (window_lo + window_hi); }
    double half_span() const { return 0.5 * (window_hi - window_lo); }  // 2 r r'
};

enum class FilterKind { None, RamLak };
enum class PlaneSource { Radon, LinearInversion };

// Reconstructed wall-parallel image. For Radon output the coordinates are
// the scaled plane coordinates 2r'*(x, y) (units of v, m^2) over
// [-extent, extent]^2; for linear inversion they are plane meters.
struct PlaneImage {
    Array2D<float> data;  // [h][w], row i along +y
    double extent = 0.0;
    double pixel_pitch = 0.0;  // meters on the hidden plane
    PlaneSource source = PlaneSource::Radon;

    double x_of(int j) const { return -extent + j * (2.0 * extent / (data.cols - 1)); }
    double y_of(int i) const { return -extent + i * (2.0 * extent / (data.rows - 1)); }
};

CroppedSinogram crop_sinogram(const TransientSinogram& sino, double r_est,
                              const ScanCircle& circle);

// Unfiltered (default) or Ram-Lak filtered backprojection, treating row k as
// a parallel projection at scan angle phi_k with detector coordinate
// s = -(u cos phi_k + w sin phi_k). Output spans [-S, S]^2, S = 2 r r'.
PlaneImage inverse_radon(const CroppedSinogram& cs, FilterKind filter = FilterKind::None,
                         int out_size = 360);

std::vector<PlaneImage> refocus(const TransientSinogram& sino, const std::vector<double>& radii,
                                FilterKind filter = FilterKind::None, int out_size = 360);

// Intensity-weighted mean of the v axis -> r_est = sqrt(mean_v - r'^2).
double auto_focus(const TransientSinogram& sino);

// Radial fisheye correction: output pixel at normalized radius q samples the
// input at q*(1 + strength*q^2); strength 0 is the identity.
PlaneImage undistort(const PlaneImage& img, double strength);

// Offset of a scatterer's trace center from the focused window center.
inline double circle_of_confusion(double r_gt, double r_est) {
    return r_gt * r_gt - r_est * r_est;
}

// Forward map from plane albedos at depth z = d to a v-axis sinogram.
// Columns are stored sparsely (each is one scatterer's sinogram) but behave
// like the dense matrix: apply()/apply_transpose() and column(j).
struct PlaneSystem {
    double depth = 0.0;
    double lambda = 0.0;
    GridSpec grid;
    ScanCircle circle;
    TimeAxis time_axis;
    int num_v = 0;

    struct Entry {
        int bin;  // flattened sinogram index angle*num_v + v
        float value;
    };
    std::vector<std::vector<Entry>> cols;  // per plane pixel i*nx + j

    int rows() const { return circle.num_angles * num_v; }
    int pixels() const { return grid.nx * grid.ny; }
    std::vector<float> column(int j) const;
    void apply(const std::vector<double>& rho, std::vector<double>& tau) const;
    void apply_transpose(const std::vector<double>& tau, std::vector<double>& rho) const;
};

PlaneSystem build_plane_matrix(double depth, const ScanCircle& circle, int resolution,
                               double plane_width, const TimeAxis& axis, int num_v,
                               double lambda = 0.0, std::size_t budget_bytes = 1ull << 30);

struct PlaneSolveResult {
    PlaneImage image;  // raw least-squares solution, negatives preserved
    bool converged = false;
    double relative_residual = 0.0;  // of the normal equations
    int iterations = 0;
};

// Ridge-regularized least squares via conjugate gradient on the normal
// equations (A^T A + lambda I) rho = A^T tau, relative residual 1e-6.
PlaneSolveResult solve_plane(const TransientSinogram& sino, const PlaneSystem& sys,
                             int max_iterations = 2000, double tolerance = 1e-6);

}  // namespace c2nlos
