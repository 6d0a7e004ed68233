#include "c2nlos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "c2nlos/errors.hpp"

namespace c2nlos {

namespace {

double range_of(const Array2D<float>& ref) {
    float lo = std::numeric_limits<float>::max(), hi = std::numeric_limits<float>::lowest();
    for (float v : ref.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double r = static_cast<double>(hi) - lo;
    return r > 0.0 ? r : 1.0;
}

}  // namespace

double ssim(const Array2D<float>& img, const Array2D<float>& ref, int window,
            double dynamic_range, double k1, double k2) {
    if (img.rows != ref.rows || img.cols != ref.cols) throw SizeMismatch("ssim: image sizes differ");
    if (window < 1 || window > img.rows || window > img.cols)
        throw Error("ssim: window does not fit the image");

    double L = dynamic_range > 0.0 ? dynamic_range : range_of(ref);
    double c1 = (k1 * L) * (k1 * L);
    double c2 = (k2 * L) * (k2 * L);
    double inv_n = 1.0 / (static_cast<double>(window) * window);

    double total = 0.0;
    long count = 0;
    for (int i = 0; i + window <= img.rows; ++i) {
        for (int j = 0; j + window <= img.cols; ++j) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int di = 0; di < window; ++di) {
                const float* a = img.row(i + di) + j;
                const float* b = ref.row(i + di) + j;
                for (int dj = 0; dj < window; ++dj) {
                    double x = a[dj], y = b[dj];
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            }
            double mx = sx * inv_n, my = sy * inv_n;
            double vx = sxx * inv_n - mx * mx;
            double vy = syy * inv_n - my * my;
            double cov = sxy * inv_n - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / count;
}

double mse(const Array2D<float>& a, const Array2D<float>& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw SizeMismatch("mse: image sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a.v[i]) - b.v[i];
        acc += d * d;
    }
    return acc / a.size();
}

double psnr(const Array2D<float>& img, const Array2D<float>& ref, double dynamic_range) {
    double L = dynamic_range > 0.0 ? dynamic_range : range_of(ref);
    double m = mse(img, ref);
    if (m <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(L * L / m);
}

// Jonker-Volgenant style shortest augmenting path; potentials keep reduced
// costs nonnegative so each augmentation is a Dijkstra pass.
std::vector<int> hungarian_match(const Array2D<double>& cost) {
    if (cost.rows != cost.cols) throw SizeMismatch("hungarian_match: cost matrix must be square");
    int n = cost.rows;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, n), way(n + 1, n);  // p[j] = row matched to column j

    for (int i = 0; i < n; ++i) {
        p[n] = i;
        int j0 = n;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = n;
            double delta = inf;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != n);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != n);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 0; j < n; ++j)
        if (p[j] < n) row_to_col[p[j]] = j;
    return row_to_col;
}

MatchReport match_points(const std::vector<CartesianPoint>& truth,
                         const std::vector<CartesianPoint>& detected) {
    if (truth.size() != detected.size())
        throw SizeMismatch("match_points: truth and detection counts differ");
    int n = static_cast<int>(truth.size());
    MatchReport rep;
    if (n == 0) return rep;

    Array2D<double> cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost(i, j) = norm(truth[i] - detected[j]);
    rep.assignment = hungarian_match(cost);

    rep.error.resize(n);
    for (int i = 0; i < n; ++i) {
        CartesianPoint e = detected[rep.assignment[i]] - truth[i];
        rep.error[i] = e;
        rep.mean_abs_error.x += std::abs(e.x) / n;
        rep.mean_abs_error.y += std::abs(e.y) / n;
        rep.mean_abs_error.z += std::abs(e.z) / n;
        double d = norm(e);
        rep.mean_distance += d / n;
        rep.max_distance = std::max(rep.max_distance, d);
    }
    return rep;
}

}  // namespace c2nlos
