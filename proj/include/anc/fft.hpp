#ifndef ANC_FFT_HPP
#define ANC_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace anc {

/// Real-to-complex FFT of a fixed power-of-two size, backed by FFTW.
/// Each instance owns its plans and scratch buffers; instances are not
/// shareable across threads, but independent instances may run
/// concurrently (plan creation is serialized internally).
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// in: n real samples (shorter inputs are zero-padded). out: n/2+1 bins.
  void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out);

  /// Inverse transform, normalized by 1/n. out: n real samples.
  void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out);

 private:
  std::size_t n_;
  void* plan_fwd_;
  void* plan_inv_;
  double* real_buf_;
  void* cplx_buf_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace anc

#endif  // ANC_FFT_HPP
