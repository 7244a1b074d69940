#include "anc/dsp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <mutex>

#include "anc/fft.hpp"

namespace anc {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_conv_args(std::size_t nx, std::size_t nh) {
  if (nx == 0) throw ShapeError("convolve: empty input signal");
  if (nh == 0) throw ShapeError("convolve: empty filter");
}
}  // namespace

std::vector<double> direct_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  check_conv_args(x.size(), h.size());
  const std::size_t n = x.size();
  const std::size_t k = h.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kmax = std::min(k - 1, i);
    double acc = 0.0;
    for (std::size_t j = 0; j <= kmax; ++j) acc += h[j] * x[i - j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> fast_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  check_conv_args(x.size(), h.size());
  const std::size_t n = x.size();
  const std::size_t k = h.size();
  const std::size_t nfft = next_pow2(2 * k);
  const std::size_t step = nfft - k + 1;

  RealFft fft(nfft);
  std::vector<std::complex<double>> hf;
  fft.forward(h, hf);

  std::vector<double> out(n, 0.0);
  std::vector<double> seg(nfft);
  std::vector<std::complex<double>> xf;
  std::vector<double> block;
  for (std::size_t n0 = 0; n0 < n; n0 += step) {
    // segment covers x[n0-(k-1) .. n0+step-1], zero outside the signal
    for (std::size_t i = 0; i < nfft; ++i) {
      const long long src = static_cast<long long>(n0) - static_cast<long long>(k - 1) +
                            static_cast<long long>(i);
      seg[i] = (src >= 0 && src < static_cast<long long>(n)) ? x[static_cast<std::size_t>(src)] : 0.0;
    }
    fft.forward(seg, xf);
    for (std::size_t i = 0; i < xf.size(); ++i) xf[i] *= hf[i];
    fft.inverse(xf, block);
    const std::size_t valid = std::min(step, n - n0);
    for (std::size_t i = 0; i < valid; ++i) out[n0 + i] = block[k - 1 + i];
  }
  return out;
}

Signal direct_convolve(const Signal& x, const FIRCoeffs& h) {
  return Signal(direct_convolve(x.samples, h.taps), x.sample_rate);
}

Signal fast_convolve(const Signal& x, const FIRCoeffs& h) {
  return Signal(fast_convolve(x.samples, h.taps), x.sample_rate);
}

std::vector<double> xcorr(const std::vector<double>& a, const std::vector<double>& b,
                          std::size_t max_lag) {
  if (a.empty() || b.empty()) throw ShapeError("xcorr: empty input");
  if (max_lag == 0) throw ShapeError("xcorr: max_lag must be >= 1");
  const std::size_t m = next_pow2(std::max(a.size() + max_lag, b.size()));
  RealFft fft(m);
  std::vector<std::complex<double>> af, bf;
  fft.forward(a, af);
  fft.forward(b, bf);
  for (std::size_t i = 0; i < af.size(); ++i) af[i] = std::conj(af[i]) * bf[i];
  std::vector<double> full;
  fft.inverse(af, full);
  full.resize(max_lag);
  return full;
}

double a_weighting_db(double f_hz) {
  // Analog A-weighting magnitude, pole frequencies per IEC 61672.
  const double f1 = 20.598997, f2 = 107.65265, f3 = 737.86223, f4 = 12194.217;
  auto ra = [&](double f) {
    const double f2q = f * f;
    return (f4 * f4 * f2q * f2q) /
           ((f2q + f1 * f1) * std::sqrt((f2q + f2 * f2) * (f2q + f3 * f3)) * (f2q + f4 * f4));
  };
  return 20.0 * std::log10(ra(f_hz) / ra(1000.0));
}

namespace {

FIRCoeffs design_a_weighting(double fs, std::size_t length) {
  const std::size_t m = (length - 1) / 2;  // half-order; unknowns m+1

  auto ra_lin = [](double f) {
    return f <= 0.0 ? 0.0 : std::pow(10.0, a_weighting_db(f) / 20.0);
  };

  // Dense uniform grid plus extra low-frequency points: relative (per-dB)
  // weighting needs resolution where the target is small.
  std::vector<double> grid;
  const std::size_t uniform_pts = 2048;
  for (std::size_t i = 0; i < uniform_pts; ++i)
    grid.push_back(0.5 * fs * static_cast<double>(i) / static_cast<double>(uniform_pts - 1));
  const std::size_t log_pts = 256;
  for (std::size_t i = 0; i < log_pts; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(log_pts - 1);
    grid.push_back(10.0 * std::pow(200.0, t));  // 10 Hz .. 2 kHz
  }

  const std::size_t g = grid.size();
  Eigen::MatrixXd basis(g, m + 1);
  Eigen::VectorXd target(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double f = grid[i];
    const double r = ra_lin(f);
    double w = 1.0 / std::max(r, 1e-3);  // relative error weighting, capped
    if (f >= 40.0 && f <= 300.0) w *= 4.0;  // the curve bends hardest here
    basis(i, 0) = w;
    for (std::size_t k = 1; k <= m; ++k)
      basis(i, k) = w * 2.0 * std::cos(2.0 * kPi * f * static_cast<double>(k) / fs);
    target(i) = w * r;
  }

  Eigen::VectorXd c = basis.colPivHouseholderQr().solve(target);

  FIRCoeffs fir;
  fir.taps.assign(length, 0.0);
  fir.taps[m] = c(0);
  for (std::size_t k = 1; k <= m; ++k) {
    fir.taps[m + k] = c(k);
    fir.taps[m - k] = c(k);
  }

  // Pin the 1 kHz gain to exactly 0 dB.
  double h1k = c(0);
  for (std::size_t k = 1; k <= m; ++k)
    h1k += 2.0 * c(k) * std::cos(2.0 * kPi * 1000.0 * static_cast<double>(k) / fs);
  for (double& t : fir.taps) t /= h1k;
  return fir;
}

}  // namespace

FIRCoeffs a_weighting_fir(double sample_rate, std::size_t length) {
  if (length < 129 || length % 2 == 0)
    throw DomainError("a_weighting_fir: length must be odd and >= 129");
  if (sample_rate < 8000.0 || sample_rate > 48000.0)
    throw DomainError("a_weighting_fir: sample rate outside 8-48 kHz");

  static std::mutex cache_mutex;
  static std::map<std::pair<long, std::size_t>, FIRCoeffs> cache;
  const auto key = std::make_pair(std::lround(sample_rate), length);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  FIRCoeffs fir = design_a_weighting(sample_rate, length);
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, fir);
  return fir;
}

double nmse_db(const Signal& e, const Signal& d) {
  if (e.size() != d.size()) throw ShapeError("nmse_db: length mismatch");
  if (e.size() == 0) throw ShapeError("nmse_db: empty signals");
  const double pd = energy(d.samples);
  if (pd <= 0.0) throw DomainError("nmse_db: degenerate reference (zero disturbance power)");
  const double pe = energy(e.samples);
  if (pe <= 0.0) return kMetricFloorDb;
  return std::max(kMetricFloorDb, 10.0 * std::log10(pe / pd));
}

double dba_delta_db(const Signal& e, const Signal& d) {
  if (e.size() != d.size()) throw ShapeError("dba_delta_db: length mismatch");
  if (e.size() == 0) throw ShapeError("dba_delta_db: empty signals");
  const FIRCoeffs a = a_weighting_fir(e.sample_rate, 257);
  const double pd = energy(fast_convolve(d.samples, a.taps));
  if (pd <= 0.0) throw DomainError("dba_delta_db: degenerate reference");
  const double pe = energy(fast_convolve(e.samples, a.taps));
  if (pe <= 0.0) return kMetricFloorDb;
  return std::max(kMetricFloorDb, 10.0 * std::log10(pe / pd));
}

SpectrogramMatrix stft_spectrogram(const Signal& x, std::size_t frame, std::size_t hop) {
  if (frame == 0 || (frame & (frame - 1)) != 0)
    throw ConfigError("stft_spectrogram: frame must be a power of two");
  if (hop == 0 || hop > frame) throw ConfigError("stft_spectrogram: need 0 < hop <= frame");
  if (x.size() < frame) throw ShapeError("stft_spectrogram: signal shorter than one frame");

  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(frame)));

  RealFft fft(frame);
  SpectrogramMatrix s;
  s.frame_size = frame;
  s.hop = hop;
  s.sample_rate = x.sample_rate;

  std::vector<double> buf(frame);
  std::vector<std::complex<double>> spec;
  const std::size_t n_frames = 1 + (x.size() - frame) / hop;
  s.magnitudes_db.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t off = f * hop;
    for (std::size_t i = 0; i < frame; ++i) buf[i] = x[off + i] * window[i];
    fft.forward(buf, spec);
    std::vector<double> row(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double mag = std::abs(spec[i]);
      row[i] = mag > 0.0 ? std::max(kSpectrogramFloorDb, 20.0 * std::log10(mag))
                         : kSpectrogramFloorDb;
    }
    s.magnitudes_db.push_back(std::move(row));
  }
  return s;
}

void write_spectrogram_csv(const SpectrogramMatrix& s, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("write_spectrogram_csv: cannot open " + path);
  const std::size_t bins = s.bins();
  for (std::size_t k = 0; k < bins; ++k) {
    const double freq = s.sample_rate * static_cast<double>(k) / static_cast<double>(s.frame_size);
    std::fprintf(f, "%s%.2f", k ? "," : "", freq);
  }
  std::fprintf(f, "\n");
  for (const auto& row : s.magnitudes_db) {
    for (std::size_t k = 0; k < row.size(); ++k)
      std::fprintf(f, "%s%.3f", k ? "," : "", row[k]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace anc
