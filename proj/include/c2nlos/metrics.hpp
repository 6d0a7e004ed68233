#pragma once

#include <vector>

#include "c2nlos/array.hpp"
#include "c2nlos/geometry.hpp"

namespace c2nlos {

// Mean local structural similarity between two equal-sized images, computed
// over uniform square windows (stride 1, fully inside the image). The
// dynamic range L is taken from the reference unless given explicitly.
double ssim(const Array2D<float>& img, const Array2D<float>& ref, int window = 8,
            double dynamic_range = 0.0, double k1 = 0.01, double k2 = 0.03);

double mse(const Array2D<float>& a, const Array2D<float>& b);
double psnr(const Array2D<float>& img, const Array2D<float>& ref, double dynamic_range = 0.0);

// Minimum-cost one-to-one assignment of rows to columns for a square cost
// matrix (O(n^3) shortest augmenting path). Returns col index per row.
std::vector<int> hungarian_match(const Array2D<double>& cost);

struct MatchReport {
    std::vector<int> assignment;        // detection index per ground-truth point
    std::vector<CartesianPoint> error;  // signed per-axis error, matched pairs
    CartesianPoint mean_abs_error;      // per-axis mean of |error|
    double mean_distance = 0.0;
    double max_distance = 0.0;
};

// Pairs detections with ground truth by minimum total euclidean distance.
// Requires equal counts; the caller decides what recall means.
MatchReport match_points(const std::vector<CartesianPoint>& truth,
                         const std::vector<CartesianPoint>& detected);

}  // namespace c2nlos
