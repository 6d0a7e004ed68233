#include "c2nlos/recon3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>

#include "c2nlos/errors.hpp"
#include "c2nlos/fft.hpp"
#include "c2nlos/parallel.hpp"

namespace c2nlos {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int signed_offset(int i, int n) { return i <= n / 2 ? i : i - n; }

double dot(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

double norm2(const std::vector<float>& a) { return dot(a, a); }

}  // namespace

// ===================================================================
// LctOperator
// ===================================================================

LctOperator::LctOperator(const GridSpec& grid, int num_v, double v_extent)
    : grid_(grid), num_v_(num_v), v_extent_(v_extent) {
    if (!power_of_two(grid.nx) || !power_of_two(grid.ny) || !power_of_two(num_v))
        throw Error("lct: grid dimensions must be powers of two");
    if (grid.nx < 2 || grid.ny < 2 || num_v < 2 || v_extent <= 0.0)
        throw Error("lct: degenerate grid");

    int pv = padded_v();
    fft_ = std::make_unique<RealFft>(std::vector<int>{pv, grid.ny, grid.nx});

    // Paraboloid kernel: a voxel at lateral offset (ox, oy) shows up
    // ox^2 + oy^2 later along the v axis, split across the two nearest
    // bins with unit total weight. Offsets landing past num_v are
    // dropped; with 2x padding the convolution then cannot wrap.
    fft_->zero_real();
    double* kern = fft_->real();
    double step_x = grid.width / (grid.nx - 1);
    double step_y = grid.height / (grid.ny - 1);
    double bin = dv();
    for (int j = 0; j < grid.ny; ++j) {
        double oy = signed_offset(j, grid.ny) * step_y;
        for (int i = 0; i < grid.nx; ++i) {
            double ox = signed_offset(i, grid.nx) * step_x;
            double f = (ox * ox + oy * oy) / bin;
            int b0 = static_cast<int>(f);
            double w = f - b0;
            if (b0 >= num_v) continue;
            std::size_t at = static_cast<std::size_t>(b0) * grid.ny * grid.nx +
                             static_cast<std::size_t>(j) * grid.nx + i;
            kern[at] += 1.0 - w;
            if (b0 + 1 < num_v) kern[at + static_cast<std::size_t>(grid.ny) * grid.nx] += w;
        }
    }
    fft_->forward();
    spectrum_.resize(fft_->cplx_size());
    for (std::size_t i = 0; i < spectrum_.size(); ++i)
        spectrum_[i] = {fft_->cplx()[i][0], fft_->cplx()[i][1]};
}

LctOperator::~LctOperator() = default;
LctOperator::LctOperator(LctOperator&&) noexcept = default;
LctOperator& LctOperator::operator=(LctOperator&&) noexcept = default;

void LctOperator::convolve(const Array3D<float>& in, Array3D<float>& out, bool conjugate) {
    int pv = padded_v();
    if (in.n0 != pv || in.n1 != grid_.ny || in.n2 != grid_.nx)
        throw Error("lct: cube shape does not match the operator grid");
    if (out.n0 != pv || out.n1 != grid_.ny || out.n2 != grid_.nx)
        out = Array3D<float>(pv, grid_.ny, grid_.nx);

    double* re = fft_->real();
    parallel_for(in.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) re[i] = in.v[i];
    });
    fft_->forward();
    fftw_complex* cx = fft_->cplx();
    double sign = conjugate ? -1.0 : 1.0;
    parallel_for(spectrum_.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double xr = cx[i][0], xi = cx[i][1];
            double kr = spectrum_[i].real(), ki = sign * spectrum_[i].imag();
            cx[i][0] = xr * kr - xi * ki;
            cx[i][1] = xr * ki + xi * kr;
        }
    });
    fft_->inverse();
    double s = fft_->scale();
    parallel_for(out.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out.v[i] = static_cast<float>(re[i] * s);
    });
}

void LctOperator::apply(const Array3D<float>& rho, Array3D<float>& out) {
    convolve(rho, out, false);
}

void LctOperator::apply_adjoint(const Array3D<float>& meas, Array3D<float>& out) {
    convolve(meas, out, true);
}

LctOperator build_lct_operator(const GridSpec& grid, int num_v, double v_extent) {
    return LctOperator(grid, num_v, v_extent);
}

// ===================================================================
// SamplingMask
// ===================================================================

bool SamplingMask::one_hot() const {
    for (const auto& row : rows) {
        if (row.size() != 1 || row[0].weight != 1.0f) return false;
    }
    return true;
}

Array2D<float> SamplingMask::apply(const Array3D<float>& cube) const {
    if (cube.n1 != ny || cube.n2 != nx) throw SizeMismatch("mask: cube grid mismatch");
    int nv = cube.n0;
    std::size_t slice = static_cast<std::size_t>(ny) * nx;
    Array2D<float> out(num_rows(), nv);
    parallel_for(rows.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            for (int s = 0; s < nv; ++s) {
                double acc = 0.0;
                for (const Tap& t : rows[r])
                    acc += static_cast<double>(t.weight) * cube.v[s * slice + t.pixel];
                out(static_cast<int>(r), s) = static_cast<float>(acc);
            }
        }
    });
    return out;
}

Array3D<float> SamplingMask::apply_adjoint(const Array2D<float>& samples) const {
    if (samples.rows != num_rows()) throw SizeMismatch("mask: sample row count mismatch");
    int nv = samples.cols;
    std::size_t slice = static_cast<std::size_t>(ny) * nx;
    Array3D<float> cube(nv, ny, nx);
    for (int r = 0; r < num_rows(); ++r)
        for (const Tap& t : rows[r])
            for (int s = 0; s < nv; ++s)
                cube.v[s * slice + t.pixel] += t.weight * samples(r, s);
    return cube;
}

SamplingMask circle_mask(const GridSpec& grid, const ScanCircle& circle) {
    SamplingMask mask;
    mask.nx = grid.nx;
    mask.ny = grid.ny;
    mask.rows.resize(circle.num_angles);
    double step_x = grid.width / (grid.nx - 1);
    double step_y = grid.height / (grid.ny - 1);
    for (int k = 0; k < circle.num_angles; ++k) {
        CartesianPoint p = circle.point(k);
        double gx = (p.x - grid.x(0)) / step_x;
        double gy = (p.y - grid.y(0)) / step_y;
        if (gx < 0.0 || gx > grid.nx - 1 || gy < 0.0 || gy > grid.ny - 1)
            throw CircleOutOfBounds("mask: scan circle leaves the wall grid");
        int i0 = std::min(static_cast<int>(gx), grid.nx - 2);
        int j0 = std::min(static_cast<int>(gy), grid.ny - 2);
        double fx = gx - i0, fy = gy - j0;
        double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
        int px[4] = {j0 * grid.nx + i0, j0 * grid.nx + i0 + 1, (j0 + 1) * grid.nx + i0,
                     (j0 + 1) * grid.nx + i0 + 1};
        for (int t = 0; t < 4; ++t)
            if (w[t] > 0.0) mask.rows[k].push_back({px[t], static_cast<float>(w[t])});
    }
    return mask;
}

SamplingMask identity_mask(const GridSpec& grid) {
    SamplingMask mask;
    mask.nx = grid.nx;
    mask.ny = grid.ny;
    mask.rows.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
    for (int p = 0; p < grid.nx * grid.ny; ++p) mask.rows[p].push_back({p, 1.0f});
    return mask;
}

// ===================================================================
// proximal maps / finite differences
// ===================================================================

namespace {

template <typename T>
void prox_data_impl(const T* v, const T* tau, double mu, T* z, std::size_t n) {
    double inv = 1.0 / (1.0 + mu);
    for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<T>((tau[i] + mu * v[i]) * inv);
}

template <typename T>
void prox_nonneg_impl(const T* v, T* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = v[i] > T(0) ? v[i] : T(0);
}

template <typename T>
void prox_l1_impl(const T* v, double threshold, T* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double a = std::abs(static_cast<double>(v[i])) - threshold;
        z[i] = a > 0.0 ? static_cast<T>(v[i] < T(0) ? -a : a) : T(0);
    }
}

}  // namespace

void prox_data(const float* v, const float* tau, double mu, float* z, std::size_t n) {
    prox_data_impl(v, tau, mu, z, n);
}
void prox_data(const double* v, const double* tau, double mu, double* z, std::size_t n) {
    prox_data_impl(v, tau, mu, z, n);
}

void prox_nonneg(const float* v, float* z, std::size_t n) { prox_nonneg_impl(v, z, n); }
void prox_nonneg(const double* v, double* z, std::size_t n) { prox_nonneg_impl(v, z, n); }

void prox_l1(const float* v, double threshold, float* z, std::size_t n) {
    prox_l1_impl(v, threshold, z, n);
}
void prox_l1(const double* v, double threshold, double* z, std::size_t n) {
    prox_l1_impl(v, threshold, z, n);
}

Array3D<float> finite_difference_apply(const Array3D<float>& vol, int axis) {
    if (axis < 0 || axis > 2) throw Error("finite difference: axis must be 0, 1, or 2");
    Array3D<float> out(vol.n0, vol.n1, vol.n2);
    for (int k = 0; k < vol.n0; ++k)
        for (int j = 0; j < vol.n1; ++j)
            for (int i = 0; i < vol.n2; ++i) {
                int kn = axis == 0 ? (k + 1) % vol.n0 : k;
                int jn = axis == 1 ? (j + 1) % vol.n1 : j;
                int in = axis == 2 ? (i + 1) % vol.n2 : i;
                out(k, j, i) = vol(kn, jn, in) - vol(k, j, i);
            }
    return out;
}

Array3D<float> finite_difference_adjoint(const Array3D<float>& vol, int axis) {
    if (axis < 0 || axis > 2) throw Error("finite difference: axis must be 0, 1, or 2");
    Array3D<float> out(vol.n0, vol.n1, vol.n2);
    for (int k = 0; k < vol.n0; ++k)
        for (int j = 0; j < vol.n1; ++j)
            for (int i = 0; i < vol.n2; ++i) {
                int kp = axis == 0 ? (k + vol.n0 - 1) % vol.n0 : k;
                int jp = axis == 1 ? (j + vol.n1 - 1) % vol.n1 : j;
                int ip = axis == 2 ? (i + vol.n2 - 1) % vol.n2 : i;
                out(k, j, i) = vol(kp, jp, ip) - vol(k, j, i);
            }
    return out;
}

// ===================================================================
// linearized ADMM
// ===================================================================

namespace {

// |C|^2 estimate by power iteration on C* C for the enabled blocks.
double operator_norm_sq(LctOperator& op, const SamplingMask& mask, bool use_nonneg, bool use_l1,
                        bool use_tv, int power_iterations, std::uint64_t seed) {
    int pv = op.padded_v(), ny = op.grid().ny, nx = op.grid().nx;
    Array3D<float> w(pv, ny, nx), h(pv, ny, nx), acc(pv, ny, nx);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (float& x : w.v) x = static_cast<float>(gauss(rng));
    double lambda = 1.0;
    for (int it = 0; it < power_iterations; ++it) {
        double n = std::sqrt(norm2(w.v));
        if (n == 0.0) break;
        for (float& x : w.v) x = static_cast<float>(x / n);

        op.apply(w, h);
        Array2D<float> s = mask.apply(h);
        Array3D<float> back = mask.apply_adjoint(s);
        op.apply_adjoint(back, acc);
        int identity_blocks = (use_nonneg ? 1 : 0) + (use_l1 ? 1 : 0);
        if (identity_blocks > 0)
            for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += identity_blocks * w.v[i];
        if (use_tv)
            for (int axis = 0; axis < 3; ++axis) {
                Array3D<float> d = finite_difference_adjoint(finite_difference_apply(w, axis), axis);
                for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += d.v[i];
            }
        lambda = std::sqrt(norm2(acc.v));
        std::swap(w.v, acc.v);
    }
    return lambda;
}

}  // namespace

VoxelVolume admm_reconstruct(const TransientSinogram& sino, LctOperator& op,
                             const SamplingMask& mask, const AdmmParams& params,
                             AdmmReport* report) {
    if (sino.data.rows == 0 || sino.data.cols == 0) throw EmptySinogram("admm: empty sinogram");
    if (sino.axis_kind != AxisKind::V) throw Error("admm: sinogram must be on the v axis");
    if (sino.bins() != op.num_v()) throw SizeMismatch("admm: sinogram bins != operator v bins");
    if (std::abs(sino.v_max - op.v_extent()) > 1e-9 * op.v_extent())
        throw SizeMismatch("admm: sinogram v range != operator v range");
    if (mask.num_rows() != sino.num_angles()) throw SizeMismatch("admm: mask rows != angles");
    if (mask.nx != op.grid().nx || mask.ny != op.grid().ny)
        throw SizeMismatch("admm: mask grid != operator grid");

    int nv = op.num_v(), pv = op.padded_v();
    int ny = op.grid().ny, nx = op.grid().nx;
    int na = sino.num_angles();
    double mu = params.mu;

    // zero-extend the measurement over the padded v range; the pad
    // region fits "no signal", which keeps the solve fully circular
    Array2D<float> tau(na, pv);
    double tau_max = 0.0;
    for (int k = 0; k < na; ++k)
        for (int b = 0; b < nv; ++b) {
            tau(k, b) = sino.data(k, b);
            tau_max = std::max(tau_max, std::abs(static_cast<double>(sino.data(k, b))));
        }

    double lambda_s = params.lambda_s * tau_max;
    double lambda_tv = params.lambda_tv * tau_max;
    bool use_nonneg = params.nonneg;
    bool use_l1 = lambda_s > 0.0;
    bool use_tv = lambda_tv > 0.0;

    double nu = params.nu;
    if (nu <= 0.0)
        nu = 1.1 * mu *
             operator_norm_sq(op, mask, use_nonneg, use_l1, use_tv, params.power_iterations,
                              params.seed);

    Array3D<float> rho(pv, ny, nx), hrho(pv, ny, nx), grad(pv, ny, nx), tmp(pv, ny, nx);
    Array2D<float> z1(na, pv), u1(na, pv), block1(na, pv);
    Array3D<float> z2, u2, z3, u3;
    Array3D<float> zd[3], ud[3];
    if (use_nonneg) { z2 = Array3D<float>(pv, ny, nx); u2 = Array3D<float>(pv, ny, nx); }
    if (use_l1) { z3 = Array3D<float>(pv, ny, nx); u3 = Array3D<float>(pv, ny, nx); }
    if (use_tv)
        for (int a = 0; a < 3; ++a) {
            zd[a] = Array3D<float>(pv, ny, nx);
            ud[a] = Array3D<float>(pv, ny, nx);
        }

    AdmmReport local;
    AdmmReport& rep = report ? *report : local;
    rep = AdmmReport{};
    rep.nu = nu;
    rep.lambda_s = lambda_s;
    rep.lambda_tv = lambda_tv;

    double tau_norm = std::sqrt(norm2(tau.v));
    int rising = 0;
    for (int it = 0; it < params.max_iterations; ++it) {
        op.apply(rho, hrho);
        block1 = mask.apply(hrho);

        double obj = 0.0, res2 = 0.0, znorm2 = 0.0;
        for (std::size_t i = 0; i < block1.v.size(); ++i) {
            double d = tau.v[i] - block1.v[i];
            obj += 0.5 * d * d;
        }
        // data block: z1 <- prox, dual ascent, then the C*(C rho - z + u)
        // residue overwrites block1 for the gradient accumulation
        for (std::size_t i = 0; i < block1.v.size(); ++i) {
            double v = block1.v[i] + u1.v[i];
            double z = (tau.v[i] + mu * v) / (1.0 + mu);
            double r = block1.v[i] - z;
            res2 += r * r;
            znorm2 += z * z;
            double u = u1.v[i] + r;
            z1.v[i] = static_cast<float>(z);
            u1.v[i] = static_cast<float>(u);
            block1.v[i] = static_cast<float>(r + u);
        }
        Array3D<float> scat = mask.apply_adjoint(block1);
        op.apply_adjoint(scat, grad);

        if (use_nonneg)
            for (std::size_t i = 0; i < rho.v.size(); ++i) {
                double v = rho.v[i] + u2.v[i];
                double z = v > 0.0 ? v : 0.0;
                double r = rho.v[i] - z;
                res2 += r * r;
                znorm2 += z * z;
                double u = u2.v[i] + r;
                z2.v[i] = static_cast<float>(z);
                u2.v[i] = static_cast<float>(u);
                grad.v[i] += static_cast<float>(r + u);
            }
        if (use_l1) {
            double kappa = lambda_s / mu;
            for (std::size_t i = 0; i < rho.v.size(); ++i) {
                obj += lambda_s * std::abs(static_cast<double>(rho.v[i]));
                double v = rho.v[i] + u3.v[i];
                double a = std::abs(v) - kappa;
                double z = a > 0.0 ? (v < 0.0 ? -a : a) : 0.0;
                double r = rho.v[i] - z;
                res2 += r * r;
                znorm2 += z * z;
                double u = u3.v[i] + r;
                z3.v[i] = static_cast<float>(z);
                u3.v[i] = static_cast<float>(u);
                grad.v[i] += static_cast<float>(r + u);
            }
        }
        if (use_tv) {
            double kappa = lambda_tv / mu;
            for (int axis = 0; axis < 3; ++axis) {
                tmp = finite_difference_apply(rho, axis);
                for (std::size_t i = 0; i < tmp.v.size(); ++i) {
                    obj += lambda_tv * std::abs(static_cast<double>(tmp.v[i]));
                    double v = tmp.v[i] + ud[axis].v[i];
                    double a = std::abs(v) - kappa;
                    double z = a > 0.0 ? (v < 0.0 ? -a : a) : 0.0;
                    double r = tmp.v[i] - z;
                    res2 += r * r;
                    znorm2 += z * z;
                    double u = ud[axis].v[i] + r;
                    zd[axis].v[i] = static_cast<float>(z);
                    ud[axis].v[i] = static_cast<float>(u);
                    tmp.v[i] = static_cast<float>(r + u);
                }
                Array3D<float> dt = finite_difference_adjoint(tmp, axis);
                for (std::size_t i = 0; i < grad.v.size(); ++i) grad.v[i] += dt.v[i];
            }
        }

        double step = mu / nu;
        parallel_for(rho.v.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i)
                rho.v[i] = static_cast<float>(rho.v[i] - step * grad.v[i]);
        });

        rep.objective.push_back(obj);
        double rel = std::sqrt(res2) / std::max(std::sqrt(znorm2), 1e-30);
        rep.primal_residual.push_back(rel);
        rep.iterations = it + 1;

        if (!std::isfinite(obj)) throw AdmmDiverged("admm: objective is not finite");
        if (rep.objective.size() >= 2 && obj > rep.objective[rep.objective.size() - 2]) {
            if (++rising >= 20) throw AdmmDiverged("admm: objective rose 20 iterations in a row");
        } else {
            rising = 0;
        }
        if (rel < params.tolerance) {
            rep.converged = true;
            break;
        }
    }

    op.apply(rho, hrho);
    block1 = mask.apply(hrho);
    double fit2 = 0.0;
    for (std::size_t i = 0; i < block1.v.size(); ++i) {
        double d = block1.v[i] - tau.v[i];
        fit2 += d * d;
    }
    rep.data_residual = tau_norm > 0.0 ? std::sqrt(fit2) / tau_norm : std::sqrt(fit2);

    for (float& x : rho.v) x = x > 0.0f ? x : 0.0f;

    VoxelVolume vol;
    vol.grid = op.grid();
    vol.v_extent = op.v_extent();
    if (!params.unresample) {
        vol.lct_resampled = true;
        vol.data = Array3D<float>(nv, ny, nx);
        for (int k = 0; k < nv; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) vol.data(k, j, i) = rho(k, j, i);
        return vol;
    }

    // back to metric depth: rho(z) = 2 z rho_u(z^2)
    int nz = params.out_slices > 0 ? params.out_slices : nx;
    double z_min = params.z_min, z_max = params.z_max;
    if (z_min == 0.0 && z_max == 0.0) z_max = std::sqrt(op.v_extent());
    vol.lct_resampled = false;
    vol.z_min = z_min;
    vol.z_max = z_max;
    vol.data = Array3D<float>(nz, ny, nx);
    double du = op.dv();
    for (int k = 0; k < nz; ++k) {
        double z = vol.z_of(k);
        double fu = z * z / du;
        int b0 = static_cast<int>(fu);
        if (b0 >= nv - 1) b0 = nv - 2;
        if (b0 < 0) b0 = 0;
        double w = std::clamp(fu - b0, 0.0, 1.0);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double v = (1.0 - w) * rho(b0, j, i) + w * rho(b0 + 1, j, i);
                vol.data(k, j, i) = static_cast<float>(2.0 * z * v);
            }
    }
    return vol;
}

}  // namespace c2nlos
