#pragma once

#include <array>
#include <complex>
#include <vector>

#include "c2nlos/array.hpp"
#include "c2nlos/fft.hpp"
#include "c2nlos/forward.hpp"
#include "c2nlos/geometry.hpp"

namespace c2nlos {

// Vote scores over (amplitude, phase, offset) bins. Steps translate bin
// indices into physical sinusoid parameters: alpha = a*amp_step,
// beta = b*phase_step, gamma = g*offset_step.
struct HoughVolume {
    Array3D<float> data;  // [amplitude][phase][offset]
    double amp_step = 0.0;
    double phase_step = 0.0;
    double offset_step = 0.0;
};

struct HoughPeak {
    SinusoidParams params;
    double score = 0.0;
    std::array<int, 3> bin{0, 0, 0};
};

struct Detection {
    SinusoidParams params;
    CartesianPoint position;
    double score = 0.0;
};

struct LocalizeConfig {
    int num_v = 512;         // v bins used when the input still has a time axis
    int num_amplitudes = 0;  // 0 -> num_v/2
    bool median_subtract = true;
    bool v_weighting = true;  // keep the v^{3/2} radiometric scale while voting
    std::array<int, 3> suppression{4, 8, 8};
    double floor_factor = 3.0;
};

// One-pixel-wide voting template: column k has its pixel at
// num_v/2 - round(alpha_bins * cos(phi_k)), the trace of a beta = 0,
// gamma = num_v/2 sinusoid. Correlation offsets against it land directly
// at (beta, gamma - num_v/2).
Array2D<float> hough_kernel(int alpha_bins, int num_angles, int num_v);

// Reusable FFT plans + scratch for repeated voting at fixed dimensions.
class HoughVoter {
  public:
    HoughVoter(int num_angles, int num_v, int num_amplitudes);
    HoughVolume accumulate(const TransientSinogram& sino);  // requires axis_kind == V

  private:
    int na_, nv_, namp_, pad_;
    RealFft fft_;
    std::vector<std::complex<double>> data_spec_;
};

HoughVolume hough_accumulate(const TransientSinogram& sino, int num_amplitudes = 0);

// Greedy non-max suppression peak extraction; throws InsufficientPeaks when
// fewer than k peaks clear floor_factor * median(volume).
std::vector<HoughPeak> find_peaks(const HoughVolume& vol, int k,
                                  std::array<int, 3> suppression = {4, 8, 8},
                                  double floor_factor = 3.0);

std::vector<Detection> localize(const TransientSinogram& sino, int k,
                                const LocalizeConfig& config = {});

struct TrilaterationResult {
    CartesianPoint position;
    double residual = 0.0;
    bool exact = true;  // false when the spheres only meet in least squares
};

// Solves (x'_i - x)^2 = (t_i c / 2)^2 for three wall points with equal z,
// returning the z >= 0 branch. Throws CollinearPoints.
TrilaterationResult trilaterate(const std::array<double, 3>& peak_times,
                                const std::array<CartesianPoint, 3>& points);

}  // namespace c2nlos
