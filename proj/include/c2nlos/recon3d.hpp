#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "c2nlos/array.hpp"
#include "c2nlos/forward.hpp"

namespace c2nlos {

class RealFft;

// Voxel scene estimate, data[z][y][x]. Lateral extent comes from grid.
// While lct_resampled is set the slice axis is squared range (uniform in
// v over [0, v_extent]); after un-resampling it is metric depth over
// [z_min, z_max].
struct VoxelVolume {
    Array3D<float> data;
    GridSpec grid;
    bool lct_resampled = false;
    double v_extent = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;

    int slices() const { return data.n0; }
    double u_of(int k) const { return k * v_extent / (data.n0 - 1); }
    double z_of(int k) const { return z_min + k * (z_max - z_min) / (data.n0 - 1); }
};

// ===================================================================
// light-cone convolution
// ===================================================================
//
// After the v-resample a confocal measurement is the volume convolved
// with the paraboloid v = x^2 + y^2. The kernel lives on the padded
// cube [2*num_v][ny][nx]: circular laterally, zero-padded 2x along v so
// the transform of a volume in the first num_v slices cannot wrap back
// into them. apply()/apply_adjoint() work on padded cubes and share one
// cached spectrum; the pair satisfies <H a, b> = <a, H* b>.
class LctOperator {
  public:
    LctOperator(const GridSpec& grid, int num_v, double v_extent);
    ~LctOperator();
    LctOperator(LctOperator&&) noexcept;
    LctOperator& operator=(LctOperator&&) noexcept;

    const GridSpec& grid() const { return grid_; }
    int num_v() const { return num_v_; }
    int padded_v() const { return 2 * num_v_; }
    double v_extent() const { return v_extent_; }
    double dv() const { return v_extent_ / (num_v_ - 1); }

    void apply(const Array3D<float>& rho, Array3D<float>& out);
    void apply_adjoint(const Array3D<float>& meas, Array3D<float>& out);

  private:
    void convolve(const Array3D<float>& in, Array3D<float>& out, bool conjugate);

    GridSpec grid_;
    int num_v_ = 0;
    double v_extent_ = 0.0;
    std::vector<std::complex<double>> spectrum_;
    std::unique_ptr<RealFft> fft_;
};

LctOperator build_lct_operator(const GridSpec& grid, int num_v, double v_extent);

// ===================================================================
// grid -> scan-circle sampling
// ===================================================================

// Row-stochastic gather from the full wall grid onto retained samples.
// Each row holds the taps of one output sample; weights sum to 1.
struct SamplingMask {
    struct Tap {
        int pixel = 0;  // y * nx + x
        float weight = 0.0f;
    };

    int nx = 0;
    int ny = 0;
    std::vector<std::vector<Tap>> rows;

    int num_rows() const { return static_cast<int>(rows.size()); }
    bool one_hot() const;

    // cube is [nv][ny][nx]; result [rows][nv]
    Array2D<float> apply(const Array3D<float>& cube) const;
    Array3D<float> apply_adjoint(const Array2D<float>& samples) const;
};

SamplingMask circle_mask(const GridSpec& grid, const ScanCircle& circle);
SamplingMask identity_mask(const GridSpec& grid);

// ===================================================================
// proximal maps (elementwise)
// ===================================================================

// z = (tau + mu v) / (1 + mu): quadratic data fit against tau
void prox_data(const float* v, const float* tau, double mu, float* z, std::size_t n);
void prox_data(const double* v, const double* tau, double mu, double* z, std::size_t n);
// z = max(v, 0)
void prox_nonneg(const float* v, float* z, std::size_t n);
void prox_nonneg(const double* v, double* z, std::size_t n);
// z = sign(v) max(|v| - threshold, 0)
void prox_l1(const float* v, double threshold, float* z, std::size_t n);
void prox_l1(const double* v, double threshold, double* z, std::size_t n);

// Circular forward difference along axis (0 = slice, 1 = y, 2 = x) and
// its adjoint (negated backward difference).
Array3D<float> finite_difference_apply(const Array3D<float>& vol, int axis);
Array3D<float> finite_difference_adjoint(const Array3D<float>& vol, int axis);

// ===================================================================
// solver
// ===================================================================

struct AdmmParams {
    double mu = 1.0;
    double nu = 0.0;         // 0: 1.1 x power-iteration estimate of mu |C|^2
    double lambda_s = 1e-2;  // sparsity weight, relative to max |tau|
    double lambda_tv = 1e-2;
    bool nonneg = true;
    int max_iterations = 200;
    double tolerance = 1e-4;  // relative primal residual
    int power_iterations = 20;
    std::uint64_t seed = 1234;  // power-iteration start vector
    int out_slices = 0;         // 0: grid nx
    double z_min = 0.0;         // both 0: [0, sqrt(v_extent)]
    double z_max = 0.0;
    bool unresample = true;  // false: return the raw v-axis volume
};

struct AdmmReport {
    std::vector<double> objective;
    std::vector<double> primal_residual;  // relative
    int iterations = 0;
    bool converged = false;
    double nu = 0.0;
    double lambda_s = 0.0;  // absolute weights actually used
    double lambda_tv = 0.0;
    double data_residual = 0.0;  // |M H rho - tau| / |tau| at exit
};

// Fits the masked light-cone forward model to a v-resampled sinogram
// with six-block linearized ADMM: data fit, nonnegativity, L1, and
// three TV axes. sino must match the operator v grid (bins == num_v,
// same v_max). Throws AdmmDiverged when the objective rises for 20
// consecutive iterations.
VoxelVolume admm_reconstruct(const TransientSinogram& sino, LctOperator& op,
                             const SamplingMask& mask, const AdmmParams& params = {},
                             AdmmReport* report = nullptr);

}  // namespace c2nlos
