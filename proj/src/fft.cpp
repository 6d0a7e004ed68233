#include "c2nlos/fft.hpp"

#include <cstring>
#include <stdexcept>

namespace c2nlos {

RealFft::RealFft(std::vector<int> dims, unsigned flags) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("RealFft: empty dims");
    nre_ = 1;
    for (int d : dims_) {
        if (d <= 0) throw std::invalid_argument("RealFft: non-positive dim");
        nre_ *= static_cast<std::size_t>(d);
    }
    ncx_ = nre_ / static_cast<std::size_t>(dims_.back()) *
           (static_cast<std::size_t>(dims_.back()) / 2 + 1);
    scale_ = 1.0 / static_cast<double>(nre_);
    re_ = fftw_alloc_real(nre_);
    cx_ = fftw_alloc_complex(ncx_);
    if (!re_ || !cx_) throw std::bad_alloc();
    if (flags == 0) flags = FFTW_ESTIMATE;
    fwd_ = fftw_plan_dft_r2c(static_cast<int>(dims_.size()), dims_.data(), re_, cx_, flags);
    inv_ = fftw_plan_dft_c2r(static_cast<int>(dims_.size()), dims_.data(), cx_, re_, flags);
    if (!fwd_ || !inv_) throw std::runtime_error("RealFft: planning failed");
}

RealFft::~RealFft() {
    if (fwd_) fftw_destroy_plan(fwd_);
    if (inv_) fftw_destroy_plan(inv_);
    if (re_) fftw_free(re_);
    if (cx_) fftw_free(cx_);
}

void RealFft::zero_real() { std::memset(re_, 0, nre_ * sizeof(double)); }

void RealFft::forward() { fftw_execute(fwd_); }

void RealFft::inverse() { fftw_execute(inv_); }

}  // namespace c2nlos
