#include "c2nlos/radon2d.hpp"

#include <algorithm>
#include <cmath>

#include "c2nlos/errors.hpp"
#include "c2nlos/parallel.hpp"

namespace c2nlos {

namespace {

// linear interpolation on a row, zero outside
double sample_row(const float* row, int n, double x) {
    if (x < 0.0 || x > n - 1) return 0.0;
    int i = static_cast<int>(x);
    if (i >= n - 1) return row[n - 1];
    double f = x - i;
    return row[i] * (1.0 - f) + row[i + 1] * f;
}

// Ram-Lak convolution kernel (banded spatial form): center 1/(4 ds^2),
// odd taps -1/(pi^2 n^2 ds^2), even taps zero.
std::vector<double> ram_lak_kernel(int n, double ds) {
    std::vector<double> h(2 * n - 1, 0.0);
    double inv = 1.0 / (ds * ds);
    h[n - 1] = 0.25 * inv;
    for (int k = 1; k < n; k += 2) {
        double tap = -inv / (kPi * kPi * k * k);
        h[n - 1 + k] = tap;
        h[n - 1 - k] = tap;
    }
    return h;
}

}  // namespace

CroppedSinogram crop_sinogram(const TransientSinogram& sino, double r_est,
                              const ScanCircle& circle) {
    if (sino.axis_kind != AxisKind::V) throw Error("crop_sinogram expects a v-axis sinogram");
    if (sino.data.size() == 0) throw EmptySinogram("crop_sinogram: empty sinogram");
    if (!(r_est > 0.0)) throw WindowOutOfRange("crop_sinogram: focus radius must be positive");

    double rp = circle.radius;
    double lo = (r_est - rp) * (r_est - rp);
    double hi = (r_est + rp) * (r_est + rp);
    if (hi > sino.v_max * (1.0 + 1e-12))
        throw WindowOutOfRange("crop window upper edge exceeds the sinogram v range");

    // odd sample count with spacing no coarser than the input grid keeps the
    // window midpoint exactly on a sample
    int m = static_cast<int>(std::ceil(2.0 * r_est * rp / sino.dv()));
    m = std::max(m, 1);
    int nc = 2 * m + 1;

    CroppedSinogram cs;
    cs.focus_radius = r_est;
    cs.window_lo = lo;
    cs.window_hi = hi;
    cs.circle = circle;
    cs.data = Array2D<float>(sino.num_angles(), nc);

    double step = (hi - lo) / (nc - 1);
    for (int k = 0; k < sino.num_angles(); ++k) {
        const float* src = sino.data.row(k);
        float* dst = cs.data.row(k);
        for (int i = 0; i < nc; ++i) {
            double v = lo + i * step;
            dst[i] = static_cast<float>(sample_row(src, sino.bins(), v / sino.dv()));
        }
    }
    return cs;
}

PlaneImage inverse_radon(const CroppedSinogram& cs, FilterKind filter, int out_size) {
    if (cs.num_angles() < 3) throw Error("inverse_radon needs at least 3 angles");
    if (out_size < 2) throw Error("inverse_radon: output size too small");

    int na = cs.num_angles();
    int ns = cs.bins();
    double ds = cs.ds();
    double S = cs.half_span();

    Array2D<float> rows = cs.data;
    if (filter == FilterKind::RamLak) {
        std::vector<double> h = ram_lak_kernel(ns, ds);
        Array2D<float> filtered(na, ns);
        for (int k = 0; k < na; ++k) {
            const float* src = rows.row(k);
            float* dst = filtered.row(k);
            for (int i = 0; i < ns; ++i) {
                double acc = 0.0;
                for (int j = 0; j < ns; ++j) acc += src[j] * h[ns - 1 + i - j];
                dst[i] = static_cast<float>(acc * ds);
            }
        }
        rows = std::move(filtered);
    }

    PlaneImage img;
    img.data = Array2D<float>(out_size, out_size);
    img.extent = S;
    img.pixel_pitch = 2.0 * S / ((out_size - 1) * 2.0 * cs.circle.radius);
    img.source = PlaneSource::Radon;

    std::vector<double> cosk(na), sink(na);
    for (int k = 0; k < na; ++k) {
        double phi = kTwoPi * k / na;
        cosk[k] = std::cos(phi);
        sink[k] = std::sin(phi);
    }

    double weight = kPi / na;
    double pitch = 2.0 * S / (out_size - 1);
    parallel_for(out_size, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            double w = -S + i * pitch;
            float* out = img.data.row(i);
            for (int j = 0; j < out_size; ++j) {
                double u = -S + j * pitch;
                double acc = 0.0;
                for (int k = 0; k < na; ++k) {
                    double s = -(u * cosk[k] + w * sink[k]);
                    acc += sample_row(rows.row(k), ns, (s + S) / ds);
                }
                out[j] = static_cast<float>(acc * weight);
            }
        }
    });
    return img;
}

std::vector<PlaneImage> refocus(const TransientSinogram& sino, const std::vector<double>& radii,
                                FilterKind filter, int out_size) {
    std::vector<PlaneImage> stack;
    stack.reserve(radii.size());
    for (double r : radii) stack.push_back(inverse_radon(crop_sinogram(sino, r, sino.circle), filter, out_size));
    return stack;
}

double auto_focus(const TransientSinogram& sino) {
    if (sino.data.size() == 0) throw EmptySinogram("auto_focus: empty sinogram");
    if (sino.axis_kind != AxisKind::V) throw Error("auto_focus expects a v-axis sinogram");
    double total = 0.0, moment = 0.0;
    for (int k = 0; k < sino.num_angles(); ++k) {
        const float* row = sino.data.row(k);
        for (int i = 0; i < sino.bins(); ++i) {
            total += row[i];
            moment += row[i] * sino.v_of_bin(i);
        }
    }
    if (!(total > 0.0)) throw EmptySinogram("auto_focus: sinogram has no intensity");
    double mean_v = moment / total;
    double rp = sino.circle.radius;
    return std::sqrt(std::max(mean_v - rp * rp, 0.0));
}

PlaneImage undistort(const PlaneImage& img, double strength) {
    if (strength < 0.0) throw Error("undistort: strength must be >= 0");
    PlaneImage out = img;
    if (strength == 0.0) return out;

    int h = img.data.rows, w = img.data.cols;
    double cy = 0.5 * (h - 1), cx = 0.5 * (w - 1);
    double half = 0.5 * (std::min(h, w) - 1);  // radius normalization
    for (int i = 0; i < h; ++i) {
        float* dst = out.data.row(i);
        for (int j = 0; j < w; ++j) {
            double dy = (i - cy) / half, dx = (j - cx) / half;
            double q = std::sqrt(dx * dx + dy * dy);
            double scale = 1.0 + strength * q * q;
            double si = cy + dy * scale * half;
            double sj = cx + dx * scale * half;
            if (si < 0.0 || si > h - 1 || sj < 0.0 || sj > w - 1) {
                dst[j] = 0.0f;  // sampled past the border: cropped away
                continue;
            }
            int i0 = static_cast<int>(si), j0 = static_cast<int>(sj);
            int i1 = std::min(i0 + 1, h - 1), j1 = std::min(j0 + 1, w - 1);
            double fi = si - i0, fj = sj - j0;
            double val = (1 - fi) * ((1 - fj) * img.data(i0, j0) + fj * img.data(i0, j1)) +
                         fi * ((1 - fj) * img.data(i1, j0) + fj * img.data(i1, j1));
            dst[j] = static_cast<float>(val);
        }
    }
    return out;
}

std::vector<float> PlaneSystem::column(int j) const {
    std::vector<float> col(static_cast<std::size_t>(rows()), 0.0f);
    for (const Entry& e : cols[j]) col[e.bin] = e.value;
    return col;
}

void PlaneSystem::apply(const std::vector<double>& rho, std::vector<double>& tau) const {
    if (static_cast<int>(rho.size()) != pixels()) throw SizeMismatch("PlaneSystem::apply");
    tau.assign(static_cast<std::size_t>(rows()), 0.0);
    for (int j = 0; j < pixels(); ++j) {
        double a = rho[j];
        if (a == 0.0) continue;
        for (const Entry& e : cols[j]) tau[e.bin] += a * e.value;
    }
}

void PlaneSystem::apply_transpose(const std::vector<double>& tau, std::vector<double>& rho) const {
    if (static_cast<int>(tau.size()) != rows()) throw SizeMismatch("PlaneSystem::apply_transpose");
    rho.assign(static_cast<std::size_t>(pixels()), 0.0);
    for (int j = 0; j < pixels(); ++j) {
        double acc = 0.0;
        for (const Entry& e : cols[j]) acc += tau[e.bin] * e.value;
        rho[j] = acc;
    }
}

PlaneSystem build_plane_matrix(double depth, const ScanCircle& circle, int resolution,
                               double plane_width, const TimeAxis& axis, int num_v,
                               double lambda, std::size_t budget_bytes) {
    if (resolution < 1 || num_v < 2) throw Error("build_plane_matrix: bad dimensions");
    // budget the dense-equivalent working set of the solver: one sparse
    // column per pixel (<= 2 entries per angle) plus CG vectors
    std::size_t est = static_cast<std::size_t>(resolution) * resolution *
                      (static_cast<std::size_t>(circle.num_angles) * 2 * sizeof(PlaneSystem::Entry) + 64);
    if (est > budget_bytes)
        throw BudgetExceeded("plane matrix estimate " + std::to_string(est) + " bytes exceeds budget");

    PlaneSystem sys;
    sys.depth = depth;
    sys.lambda = lambda;
    sys.circle = circle;
    sys.time_axis = axis;
    sys.num_v = num_v;
    sys.grid.nx = resolution;
    sys.grid.ny = resolution;
    sys.grid.width = plane_width;
    sys.grid.height = plane_width;
    sys.grid.center = circle.center;
    sys.cols.assign(static_cast<std::size_t>(resolution) * resolution, {});

    parallel_for(resolution, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            for (int j = 0; j < resolution; ++j) {
                CartesianPoint p{sys.grid.x(j), sys.grid.y(i), circle.center.z + depth};
                Scene one{{{p, 1.0}}};
                TransientSinogram sino = resample_to_v(simulate_sinogram(one, circle, axis), num_v);
                std::vector<PlaneSystem::Entry>& col =
                    sys.cols[static_cast<std::size_t>(i) * resolution + j];
                for (int k = 0; k < circle.num_angles; ++k) {
                    const float* row = sino.data.row(k);
                    for (int b = 0; b < num_v; ++b)
                        if (row[b] != 0.0f) col.push_back({k * num_v + b, row[b]});
                }
            }
        }
    });
    return sys;
}

PlaneSolveResult solve_plane(const TransientSinogram& sino, const PlaneSystem& sys,
                             int max_iterations, double tolerance) {
    if (sino.axis_kind != AxisKind::V) throw Error("solve_plane expects a v-axis sinogram");
    if (sino.num_angles() != sys.circle.num_angles || sino.bins() != sys.num_v)
        throw SizeMismatch("solve_plane: sinogram does not match the system");

    int n = sys.pixels();
    std::vector<double> tau(static_cast<std::size_t>(sys.rows()));
    for (int k = 0; k < sino.num_angles(); ++k) {
        const float* row = sino.data.row(k);
        for (int b = 0; b < sino.bins(); ++b) tau[static_cast<std::size_t>(k) * sino.bins() + b] = row[b];
    }

    std::vector<double> b(n), x(n, 0.0), r(n), p(n), ap(n), scratch;
    sys.apply_transpose(tau, b);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);

    PlaneSolveResult res;
    res.image.data = Array2D<float>(sys.grid.ny, sys.grid.nx);
    res.image.extent = 0.5 * sys.grid.width;
    res.image.pixel_pitch = sys.grid.width / (sys.grid.nx - 1);
    res.image.source = PlaneSource::LinearInversion;

    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }

    auto normal_apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        sys.apply(in, scratch);
        sys.apply_transpose(scratch, out);
        for (int i = 0; i < n; ++i) out[i] += sys.lambda * in[i];
    };

    r = b;
    p = r;
    double rr = 0.0;
    for (double v : r) rr += v * v;

    int it = 0;
    for (; it < max_iterations; ++it) {
        if (std::sqrt(rr) <= tolerance * bnorm) break;
        normal_apply(p, ap);
        double pap = 0.0;
        for (int i = 0; i < n; ++i) pap += p[i] * ap[i];
        if (!(pap > 0.0)) break;  // numerically singular direction
        double alpha = rr / pap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_new = 0.0;
        for (double v : r) rr_new += v * v;
        double beta = rr_new / rr;
        rr = rr_new;
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }

    res.iterations = it;
    res.relative_residual = std::sqrt(rr) / bnorm;
    res.converged = res.relative_residual <= tolerance;
    for (int i = 0; i < sys.grid.ny; ++i)
        for (int j = 0; j < sys.grid.nx; ++j)
            res.image.data(i, j) = static_cast<float>(x[static_cast<std::size_t>(i) * sys.grid.nx + j]);
    return res;
}

}  // namespace c2nlos
