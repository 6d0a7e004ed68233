#pragma once

#include <fftw3.h>

#include <cstddef>
#include <vector>

namespace c2nlos {

// Owns an aligned real/complex buffer pair plus forward (r2c) and inverse
// (c2r) plans for one logical shape. The inverse leaves FFTW's usual
// unnormalized output; multiply by scale() to undo.
//
// Plan creation is not thread safe and must stay on one thread. Executing
// transforms on distinct RealFft instances is fine.
class RealFft {
  public:
    explicit RealFft(std::vector<int> dims, unsigned flags = 0);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* real() { return re_; }
    const double* real() const { return re_; }
    fftw_complex* cplx() { return cx_; }
    std::size_t real_size() const { return nre_; }
    std::size_t cplx_size() const { return ncx_; }
    double scale() const { return scale_; }
    const std::vector<int>& dims() const { return dims_; }

    void zero_real();
    void forward();  // real -> cplx
    void inverse();  // cplx -> real, unnormalized

  private:
    std::vector<int> dims_;
    std::size_t nre_ = 0, ncx_ = 0;
    double scale_ = 1.0;
    double* re_ = nullptr;
    fftw_complex* cx_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

}  // namespace c2nlos
