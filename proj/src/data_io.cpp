#include "anc/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "anc/fft.hpp"
#include "anc/rng.hpp"

namespace anc {

namespace {
constexpr double kPi = 3.14159265358979323846;

struct ChunkHeader {
  char id[4];
  std::uint32_t size;
};

template <typename T>
T read_le(std::ifstream& f) {
  T v{};
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw FormatError("read_wav: truncated file");
  return v;
}

template <typename T>
void write_le(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
}  // namespace

Signal read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_wav: cannot open " + path);

  char riff[4], wave[4];
  if (!f.read(riff, 4)) throw FormatError("read_wav: truncated file");
  std::uint32_t riff_size = read_le<std::uint32_t>(f);
  (void)riff_size;
  if (!f.read(wave, 4)) throw FormatError("read_wav: truncated file");
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw FormatError("read_wav: not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;

  while (true) {
    char id[4];
    if (!f.read(id, 4)) throw FormatError("read_wav: no data chunk");
    std::uint32_t size = read_le<std::uint32_t>(f);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("read_wav: malformed fmt chunk");
      format = read_le<std::uint16_t>(f);
      channels = read_le<std::uint16_t>(f);
      rate = read_le<std::uint32_t>(f);
      read_le<std::uint32_t>(f);  // byte rate
      read_le<std::uint16_t>(f);  // block align
      bits = read_le<std::uint16_t>(f);
      f.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("read_wav: data chunk before fmt");
      if (channels == 0) throw FormatError("read_wav: zero channels");
      const bool pcm16 = (format == 1 && bits == 16);
      const bool f32 = (format == 3 && bits == 32);
      if (!pcm16 && !f32)
        throw FormatError("read_wav: unsupported encoding (need PCM16 or float32)");
      const std::size_t bytes_per = bits / 8;
      const std::size_t frames = size / (bytes_per * channels);
      Signal out;
      out.sample_rate = static_cast<double>(rate);
      out.samples.resize(frames);
      std::vector<char> frame(bytes_per * channels);
      for (std::size_t i = 0; i < frames; ++i) {
        if (!f.read(frame.data(), static_cast<std::streamsize>(frame.size())))
          throw FormatError("read_wav: truncated data chunk");
        if (pcm16) {
          std::int16_t v;
          std::memcpy(&v, frame.data(), 2);
          out.samples[i] = static_cast<double>(v) / 32768.0;
        } else {
          float v;
          std::memcpy(&v, frame.data(), 4);
          out.samples[i] = static_cast<double>(v);
        }
      }
      return out;
    } else {
      f.seekg(size + (size & 1), std::ios::cur);
      if (!f) throw FormatError("read_wav: truncated chunk " + std::string(id, 4));
    }
  }
}

WavWriteInfo write_wav(const Signal& signal, const std::string& path, WavEncoding encoding) {
  if (!signal.all_finite()) throw DomainError("write_wav: non-finite samples");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_wav: cannot open " + path);

  const std::uint32_t n = static_cast<std::uint32_t>(signal.size());
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = n * (bits / 8);
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate));

  f.write("RIFF", 4);
  write_le<std::uint32_t>(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_le<std::uint32_t>(f, 16);
  write_le<std::uint16_t>(f, encoding == WavEncoding::Pcm16 ? 1 : 3);
  write_le<std::uint16_t>(f, 1);  // mono
  write_le<std::uint32_t>(f, rate);
  write_le<std::uint32_t>(f, rate * (bits / 8));
  write_le<std::uint16_t>(f, bits / 8);
  write_le<std::uint16_t>(f, bits);
  f.write("data", 4);
  write_le<std::uint32_t>(f, data_bytes);

  WavWriteInfo info;
  if (encoding == WavEncoding::Pcm16) {
    for (double v : signal.samples) {
      if (std::fabs(v) > 1.0) ++info.clipped;
      long q = std::lround(v * 32768.0);
      q = std::clamp(q, -32768L, 32767L);
      write_le<std::int16_t>(f, static_cast<std::int16_t>(q));
    }
  } else {
    for (double v : signal.samples) write_le<float>(f, static_cast<float>(v));
  }
  if (!f) throw IoError("write_wav: write failed for " + path);
  return info;
}

Signal resample(const Signal& signal, double target_rate) {
  const long src = std::lround(signal.sample_rate);
  const long tgt = std::lround(target_rate);
  if (src < 8000 || src > 48000 || tgt < 8000 || tgt > 48000)
    throw ConfigError("resample: rates must lie in [8, 48] kHz");
  if (src == tgt) return signal;
  if (signal.size() == 0) throw ShapeError("resample: empty signal");

  const long g = std::gcd(src, tgt);
  const long up = tgt / g;    // P
  const long down = src / g;  // Q

  // Blackman-windowed sinc at the upsampled rate. Passband to 0.75 and
  // stopband from 0.95 of the smaller Nyquist.
  const double fs_up = signal.sample_rate * static_cast<double>(up);
  const double f_nyq_min = 0.5 * std::min(signal.sample_rate, target_rate);
  const double f_pass = 0.75 * f_nyq_min;
  const double f_stop = 0.95 * f_nyq_min;
  const double fc = 0.5 * (f_pass + f_stop);
  const double trans = f_stop - f_pass;
  long half = static_cast<long>(std::ceil(2.75 * fs_up / trans));
  const long ntaps = 2 * half + 1;

  std::vector<double> kernel(ntaps);
  const double gain = static_cast<double>(up) * 2.0 * fc / fs_up;
  for (long i = 0; i < ntaps; ++i) {
    const double t = static_cast<double>(i - half);
    const double xarg = 2.0 * fc * t / fs_up;
    const double s = t == 0.0 ? 1.0 : std::sin(kPi * xarg) / (kPi * xarg);
    const double w = 0.42 + 0.5 * std::cos(kPi * t / (half + 1)) +
                     0.08 * std::cos(2.0 * kPi * t / (half + 1));
    kernel[i] = gain * s * w;
  }

  const std::size_t in_len = signal.size();
  const std::size_t out_len = static_cast<std::size_t>(
      (static_cast<unsigned long long>(in_len) * up + down / 2) / down);

  Signal out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len, 0.0);
  for (std::size_t m = 0; m < out_len; ++m) {
    const long long u = static_cast<long long>(m) * down;  // position in up-rate samples
    long long n_lo = (u - half + up - 1) / up;
    long long n_hi = (u + half) / up;
    n_lo = std::max<long long>(n_lo, 0);
    n_hi = std::min<long long>(n_hi, static_cast<long long>(in_len) - 1);
    double acc = 0.0;
    for (long long n = n_lo; n <= n_hi; ++n) {
      const long long kidx = u - n * up + half;
      acc += signal.samples[static_cast<std::size_t>(n)] * kernel[static_cast<std::size_t>(kidx)];
    }
    out.samples[m] = acc;
  }
  return out;
}

SegmentSet segment_normalize(const Signal& signal, double seconds) {
  const std::size_t seg_len = static_cast<std::size_t>(std::lround(seconds * signal.sample_rate));
  if (seg_len == 0) throw ConfigError("segment_normalize: zero segment length");
  if (signal.size() < seg_len) throw ShapeError("segment_normalize: signal shorter than one segment");

  SegmentSet set;
  const std::size_t count = signal.size() / seg_len;
  for (std::size_t s = 0; s < count; ++s) {
    Signal seg;
    seg.sample_rate = signal.sample_rate;
    seg.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(s * seg_len),
                       signal.samples.begin() + static_cast<std::ptrdiff_t>((s + 1) * seg_len));
    const double peak = peak_abs(seg.samples);
    if (peak <= 0.0)
      throw DomainError("segment_normalize: degenerate all-zero segment " + std::to_string(s));
    for (double& v : seg.samples) v /= peak;
    set.segments.push_back(std::move(seg));
    set.labels.push_back("seg" + std::to_string(s));
  }
  return set;
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "white") return NoiseKind::White;
  if (name == "pink") return NoiseKind::Pink;
  if (name == "engine_harmonics") return NoiseKind::EngineHarmonics;
  if (name == "modulated_babble_like") return NoiseKind::ModulatedBabbleLike;
  throw ConfigError("unknown noise kind: " + name);
}

std::string noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::White: return "white";
    case NoiseKind::Pink: return "pink";
    case NoiseKind::EngineHarmonics: return "engine_harmonics";
    case NoiseKind::ModulatedBabbleLike: return "modulated_babble_like";
  }
  return "?";
}

namespace {

void normalize_peak(std::vector<double>& v) {
  const double p = peak_abs(v);
  if (p > 0.0)
    for (double& x : v) x /= p;
}

// White spectrum shaped by gain(f), back to time domain.
std::vector<double> shaped_noise_impl(std::size_t n, Rng& rng, double fs,
                                      double (*gain)(double, const void*), const void* ctx) {
  const std::size_t m = next_pow2(n);
  std::vector<double> white(m);
  for (double& v : white) v = rng.gaussian();
  RealFft fft(m);
  std::vector<std::complex<double>> spec;
  fft.forward(white, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = fs * static_cast<double>(k) / static_cast<double>(m);
    spec[k] *= gain(f, ctx);
  }
  std::vector<double> out;
  fft.inverse(spec, out);
  out.resize(n);
  return out;
}

double pink_gain(double f, const void*) { return f < 1.0 ? 0.0 : 1.0 / std::sqrt(f); }

double speech_band_gain(double f, const void*) {
  if (f < 100.0 || f > 4000.0) return 0.0;
  // Flat to 500 Hz, then -6 dB/octave, with raised-cosine band edges.
  double g = f <= 500.0 ? 1.0 : 500.0 / f;
  if (f < 200.0) g *= 0.5 * (1.0 - std::cos(kPi * (f - 100.0) / 100.0));
  if (f > 3500.0) g *= 0.5 * (1.0 + std::cos(kPi * (f - 3500.0) / 500.0));
  return g;
}

struct BandCtx {
  double lo, hi;
};
double band_gain(double f, const void* ctx) {
  const auto* b = static_cast<const BandCtx*>(ctx);
  return (f >= b->lo && f <= b->hi) ? 1.0 : 0.0;
}

}  // namespace

Signal synth_noise(NoiseKind kind, double seconds, std::uint64_t seed, double sample_rate) {
  if (!(seconds > 0.0)) throw ConfigError("synth_noise: seconds must be positive");
  const std::size_t n = static_cast<std::size_t>(std::lround(seconds * sample_rate));
  Rng rng(seed);

  Signal out;
  out.sample_rate = sample_rate;

  switch (kind) {
    case NoiseKind::White: {
      out.samples.resize(n);
      for (double& v : out.samples) v = rng.gaussian();
      break;
    }
    case NoiseKind::Pink: {
      out.samples = shaped_noise_impl(n, rng, sample_rate, pink_gain, nullptr);
      break;
    }
    case NoiseKind::EngineHarmonics: {
      const double f0 = rng.uniform(80.0, 120.0);
      std::vector<double> phases;
      const int harmonics = 10;
      for (int k = 0; k < harmonics; ++k) phases.push_back(rng.uniform(0.0, 2.0 * kPi));
      // Broadband floor well below the harmonic comb.
      out.samples = shaped_noise_impl(n, rng, sample_rate, pink_gain, nullptr);
      normalize_peak(out.samples);
      for (double& v : out.samples) v *= 0.03;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double s = 0.0;
        for (int k = 1; k <= harmonics; ++k)
          s += std::sin(2.0 * kPi * f0 * k * t + phases[static_cast<std::size_t>(k - 1)]) /
               static_cast<double>(k);
        out.samples[i] += s;
      }
      break;
    }
    case NoiseKind::ModulatedBabbleLike: {
      out.samples = shaped_noise_impl(n, rng, sample_rate, speech_band_gain, nullptr);
      // 2-8 Hz amplitude modulation from band-limited noise.
      BandCtx band{2.0, 8.0};
      std::vector<double> slow = shaped_noise_impl(n, rng, sample_rate, band_gain, &band);
      const double rms = std::sqrt(energy(slow) / static_cast<double>(n));
      if (rms > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
          const double env = 1.0 + 0.8 * std::clamp(slow[i] / (2.0 * rms), -1.0, 1.0);
          out.samples[i] *= env;
        }
      }
      break;
    }
  }
  normalize_peak(out.samples);
  return out;
}

void write_fir_csv(const FIRCoeffs& fir, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("write_fir_csv: cannot open " + path);
  for (double t : fir.taps) std::fprintf(f, "%.17g\n", t);
  std::fclose(f);
}

FIRCoeffs read_fir_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("read_fir_csv: cannot open " + path);
  FIRCoeffs fir;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    try {
      fir.taps.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw FormatError("read_fir_csv: bad line '" + line + "'");
    }
  }
  if (fir.taps.empty()) throw FormatError("read_fir_csv: no taps in " + path);
  return fir;
}

}  // namespace anc
