#ifndef ANC_DSP_HPP
#define ANC_DSP_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "anc/types.hpp"

namespace anc {

/// One evaluation cell: NMSE and A-weighted level difference, both in dB
/// relative to the uncontrolled disturbance. Negative means reduction.
struct MetricsReport {
  double nmse_db = 0.0;
  double dba_delta_db = 0.0;
  std::string algorithm;
  std::string noise;
  std::string eta2;
};

struct SpectrogramMatrix {
  std::vector<std::vector<double>> magnitudes_db;  // frames x bins
  std::size_t frame_size = 0;
  std::size_t hop = 0;
  double sample_rate = 0.0;

  std::size_t frames() const { return magnitudes_db.size(); }
  std::size_t bins() const { return magnitudes_db.empty() ? 0 : magnitudes_db[0].size(); }
};

constexpr double kMetricFloorDb = -120.0;
constexpr double kSpectrogramFloorDb = -100.0;

/// Causal linear convolution truncated to len(x): out(n) = sum_k h(k) x(n-k).
Signal direct_convolve(const Signal& x, const FIRCoeffs& h);

/// Same contract as direct_convolve, computed with overlap-save block FFT.
/// Block size is the smallest power of two >= 2*len(h).
Signal fast_convolve(const Signal& x, const FIRCoeffs& h);

/// Raw-vector variants used by inner loops.
std::vector<double> direct_convolve(const std::vector<double>& x, const std::vector<double>& h);
std::vector<double> fast_convolve(const std::vector<double>& x, const std::vector<double>& h);

/// Cross-correlation c(m) = sum_n a(n) b(n+m) for m = 0..max_lag-1,
/// computed via FFT. a and b are zero outside their support.
std::vector<double> xcorr(const std::vector<double>& a, const std::vector<double>& b,
                          std::size_t max_lag);

/// Linear-phase FIR approximating the analog A-weighting magnitude response,
/// normalized to 0 dB at 1 kHz. length must be odd and >= 129.
FIRCoeffs a_weighting_fir(double sample_rate, std::size_t length);

/// Analog A-weighting gain in dB at frequency f (0 dB at 1 kHz).
double a_weighting_db(double f_hz);

/// 10*log10(sum e^2 / sum d^2), clamped to >= -120 dB.
double nmse_db(const Signal& e, const Signal& d);

/// A-weighted power ratio of e to d in dB, clamped to >= -120 dBA.
double dba_delta_db(const Signal& e, const Signal& d);

/// Hann-windowed magnitude spectrogram in dB (20*log10, floor -100 dB).
SpectrogramMatrix stft_spectrogram(const Signal& x, std::size_t frame, std::size_t hop);

/// CSV export: header row of bin frequencies, then frames x bins rows.
void write_spectrogram_csv(const SpectrogramMatrix& s, const std::string& path);

}  // namespace anc

#endif  // ANC_DSP_HPP
