#include "c2nlos/localize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "c2nlos/errors.hpp"

namespace c2nlos {

Array2D<float> hough_kernel(int alpha_bins, int num_angles, int num_v) {
    if (alpha_bins < 0 || alpha_bins > num_v / 2) throw Error("hough_kernel: alpha out of range");
    Array2D<float> t(num_angles, num_v);
    for (int k = 0; k < num_angles; ++k) {
        double phi = kTwoPi * k / num_angles;
        long c = num_v / 2 - std::lround(alpha_bins * std::cos(phi));
        c = std::clamp(c, 0L, static_cast<long>(num_v) - 1);
        t(k, static_cast<int>(c)) = 1.0f;
    }
    return t;
}

HoughVoter::HoughVoter(int num_angles, int num_v, int num_amplitudes)
    : na_(num_angles),
      nv_(num_v),
      namp_(num_amplitudes > 0 ? num_amplitudes : num_v / 2),
      pad_(2 * num_v),
      fft_({num_angles, 2 * num_v}),
      data_spec_(fft_.cplx_size()) {
    if (namp_ > num_v / 2 + 1) throw Error("amplitude grid exceeds num_v/2 bins");
}

HoughVolume HoughVoter::accumulate(const TransientSinogram& sino) {
    if (sino.axis_kind != AxisKind::V) throw Error("hough_accumulate expects a v-axis sinogram");
    if (sino.num_angles() != na_ || sino.bins() != nv_) throw Error("voter dimensions mismatch");

    // data spectrum, v axis zero-padded to 2*num_v (linear in v, circular in angle)
    fft_.zero_real();
    for (int k = 0; k < na_; ++k) {
        const float* src = sino.data.row(k);
        double* dst = fft_.real() + static_cast<std::size_t>(k) * pad_;
        for (int j = 0; j < nv_; ++j) dst[j] = src[j];
    }
    fft_.forward();
    for (std::size_t i = 0; i < fft_.cplx_size(); ++i)
        data_spec_[i] = {fft_.cplx()[i][0], fft_.cplx()[i][1]};

    HoughVolume vol;
    vol.data = Array3D<float>(namp_, na_, nv_);
    vol.amp_step = sino.dv();
    vol.phase_step = kTwoPi / na_;
    vol.offset_step = sino.dv();

    double scale = fft_.scale();
    for (int a = 0; a < namp_; ++a) {
        // template spectrum for this amplitude
        fft_.zero_real();
        for (int k = 0; k < na_; ++k) {
            double phi = kTwoPi * k / na_;
            long c = nv_ / 2 - std::lround(static_cast<double>(a) * std::cos(phi));
            c = std::clamp(c, 0L, static_cast<long>(nv_) - 1);
            fft_.real()[static_cast<std::size_t>(k) * pad_ + c] = 1.0;
        }
        fft_.forward();
        // cross-correlation: conj(template) * data
        fftw_complex* cx = fft_.cplx();
        for (std::size_t i = 0; i < fft_.cplx_size(); ++i) {
            double tr = cx[i][0], ti = cx[i][1];
            double dr = data_spec_[i].real(), di = data_spec_[i].imag();
            cx[i][0] = tr * dr + ti * di;
            cx[i][1] = tr * di - ti * dr;
        }
        fft_.inverse();
        // slice copy: correlation offset (b, g - nv/2), v offset wrapped in pad
        for (int b = 0; b < na_; ++b) {
            const double* row = fft_.real() + static_cast<std::size_t>(b) * pad_;
            float* dst = vol.data.row(a, b);
            for (int g = 0; g < nv_; ++g) {
                int off = g - nv_ / 2;
                int idx = off >= 0 ? off : off + pad_;
                dst[g] = static_cast<float>(row[idx] * scale);
            }
        }
    }
    return vol;
}

HoughVolume hough_accumulate(const TransientSinogram& sino, int num_amplitudes) {
    HoughVoter voter(sino.num_angles(), sino.bins(), num_amplitudes);
    return voter.accumulate(sino);
}

std::vector<HoughPeak> find_peaks(const HoughVolume& vol, int k, std::array<int, 3> suppression,
                                  double floor_factor) {
    if (k < 1) throw Error("find_peaks: k must be >= 1");
    const Array3D<float>& d = vol.data;

    double median;
    {
        std::vector<float> tmp(d.v);
        auto mid = tmp.begin() + tmp.size() / 2;
        std::nth_element(tmp.begin(), mid, tmp.end());
        median = *mid;
    }
    double floor = floor_factor * median;

    Array3D<float> work = d;  // NMS scratch; suppressed regions zeroed to -inf
    std::vector<HoughPeak> peaks;
    peaks.reserve(k);
    for (int n = 0; n < k; ++n) {
        int ba = -1, bb = -1, bg = -1;
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < work.n0; ++a)
            for (int b = 0; b < work.n1; ++b) {
                const float* row = work.row(a, b);
                for (int g = 0; g < work.n2; ++g) {
                    // ties broken toward the nearest scatterer (lowest gamma)
                    if (row[g] > best) {
                        best = row[g];
                        ba = a;
                        bb = b;
                        bg = g;
                    }
                }
            }
        if (!(best > floor))
            throw InsufficientPeaks("only " + std::to_string(n) + " of " + std::to_string(k) +
                                    " peaks clear the score floor");
        HoughPeak p;
        p.bin = {ba, bb, bg};
        p.score = best;
        p.params.alpha = ba * vol.amp_step;
        p.params.beta = wrap_angle(bb * vol.phase_step);
        p.params.gamma = bg * vol.offset_step;
        peaks.push_back(p);

        for (int da = -suppression[0]; da <= suppression[0]; ++da) {
            int a = ba + da;
            if (a < 0 || a >= work.n0) continue;
            for (int db = -suppression[1]; db <= suppression[1]; ++db) {
                int b = ((bb + db) % work.n1 + work.n1) % work.n1;  // phase wraps
                for (int dg = -suppression[2]; dg <= suppression[2]; ++dg) {
                    int g = bg + dg;
                    if (g < 0 || g >= work.n2) continue;
                    work(a, b, g) = -std::numeric_limits<float>::infinity();
                }
            }
        }
    }
    return peaks;
}

namespace {

// median over one angle row
float row_median(const float* row, int n, std::vector<float>& scratch) {
    scratch.assign(row, row + n);
    auto mid = scratch.begin() + n / 2;
    std::nth_element(scratch.begin(), mid, scratch.end());
    return *mid;
}

}  // namespace

std::vector<Detection> localize(const TransientSinogram& sino, int k, const LocalizeConfig& config) {
    if (sino.data.size() == 0) throw EmptySinogram("localize: empty sinogram");
    TransientSinogram work =
        sino.axis_kind == AxisKind::Time ? resample_to_v(sino, config.num_v) : sino;

    if (!config.v_weighting) {
        // undo the resampling prefactor; bin 0 has v = 0 and stays 0
        for (int a = 0; a < work.num_angles(); ++a) {
            float* row = work.data.row(a);
            for (int j = 1; j < work.bins(); ++j) {
                double v = work.v_of_bin(j);
                row[j] = static_cast<float>(row[j] / (v * std::sqrt(v)));
            }
            row[0] = 0.0f;
        }
    }
    if (config.median_subtract) {
        std::vector<float> scratch;
        for (int a = 0; a < work.num_angles(); ++a) {
            float* row = work.data.row(a);
            float med = row_median(row, work.bins(), scratch);
            for (int j = 0; j < work.bins(); ++j) row[j] -= med;
        }
    }

    HoughVoter voter(work.num_angles(), work.bins(), config.num_amplitudes);
    HoughVolume vol = voter.accumulate(work);
    std::vector<HoughPeak> peaks = find_peaks(vol, k, config.suppression, config.floor_factor);

    std::vector<Detection> out;
    out.reserve(peaks.size());
    for (const HoughPeak& p : peaks) {
        SinusoidParams params = p.params;
        // bin quantization can push alpha marginally past the physical
        // ceiling for the quantized gamma; clamp before inverting
        double r2 = params.gamma - sino.circle.radius * sino.circle.radius;
        if (r2 > 0.0)
            params.alpha = std::min(params.alpha, 2.0 * std::sqrt(r2) * sino.circle.radius);
        SphericalPoint sph = sinusoid_to_scatterer(params, sino.circle);
        Detection det;
        det.params = params;
        det.position = sino.circle.center + spherical_to_cartesian(sph);
        det.score = p.score;
        out.push_back(det);
    }
    return out;
}

TrilaterationResult trilaterate(const std::array<double, 3>& peak_times,
                                const std::array<CartesianPoint, 3>& points) {
    for (double t : peak_times)
        if (!(t > 0.0)) throw Error("trilaterate: peak times must be positive");
    if (points[0].z != points[1].z || points[0].z != points[2].z)
        throw Error("trilaterate: wall points must share a z plane");

    double r[3];
    for (int i = 0; i < 3; ++i) r[i] = peak_times[i] * kSpeedOfLight / 2.0;

    // subtract sphere i from sphere 0: 2 (p_i - p_0) . (x, y) = b_i
    double a11 = 2.0 * (points[1].x - points[0].x), a12 = 2.0 * (points[1].y - points[0].y);
    double a21 = 2.0 * (points[2].x - points[0].x), a22 = 2.0 * (points[2].y - points[0].y);
    auto sq = [](double v) { return v * v; };
    double b1 = sq(r[0]) - sq(r[1]) + sq(points[1].x) - sq(points[0].x) + sq(points[1].y) -
                sq(points[0].y);
    double b2 = sq(r[0]) - sq(r[2]) + sq(points[2].x) - sq(points[0].x) + sq(points[2].y) -
                sq(points[0].y);

    double det = a11 * a22 - a12 * a21;
    double scale = std::max({sq(a11) + sq(a12), sq(a21) + sq(a22), 1e-300});
    if (std::abs(det) < 1e-12 * scale)
        throw CollinearPoints("trilaterate: wall points are collinear");

    TrilaterationResult res;
    res.position.x = (b1 * a22 - b2 * a12) / det;
    res.position.y = (a11 * b2 - a21 * b1) / det;
    double z2 = sq(r[0]) - sq(res.position.x - points[0].x) - sq(res.position.y - points[0].y);
    res.exact = z2 >= -1e-9 * std::max(1.0, sq(r[0]));
    res.position.z = points[0].z + std::sqrt(std::max(z2, 0.0));

    double ss = 0.0;
    for (int i = 0; i < 3; ++i) {
        double d = norm(res.position - points[i]) - r[i];
        ss += d * d;
    }
    res.residual = std::sqrt(ss);
    return res;
}

}  // namespace c2nlos
