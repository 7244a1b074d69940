#include "anc/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "anc/types.hpp"

namespace anc {

namespace {
// FFTW plan creation is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("RealFft: size must be a power of two, got " + std::to_string(n));
  real_buf_ = fftw_alloc_real(n_);
  cplx_buf_ = fftw_alloc_complex(n_ / 2 + 1);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_buf_,
                                   static_cast<fftw_complex*>(cplx_buf_), FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), static_cast<fftw_complex*>(cplx_buf_),
                                   real_buf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_buf_);
  fftw_free(cplx_buf_);
}

void RealFft::forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
  if (in.size() > n_) throw ShapeError("RealFft::forward: input longer than transform size");
  std::memcpy(real_buf_, in.data(), in.size() * sizeof(double));
  std::memset(real_buf_ + in.size(), 0, (n_ - in.size()) * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  out.resize(bins());
  std::memcpy(out.data(), cplx_buf_, bins() * sizeof(std::complex<double>));
}

void RealFft::inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
  if (in.size() != bins()) throw ShapeError("RealFft::inverse: expected n/2+1 bins");
  std::memcpy(cplx_buf_, in.data(), bins() * sizeof(std::complex<double>));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  out.resize(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_buf_[i] * scale;
}

}  // namespace anc
