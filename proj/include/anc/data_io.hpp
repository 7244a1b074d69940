#ifndef ANC_DATA_IO_HPP
#define ANC_DATA_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "anc/types.hpp"

namespace anc {

enum class WavEncoding { Pcm16, Float32 };

struct WavWriteInfo {
  std::size_t clipped = 0;  // samples saturated on PCM16 export
};

/// Reads a mono (or first-channel) RIFF/WAVE file, PCM16 or float32.
/// Samples are scaled to [-1, 1]; the sample rate comes from the header.
Signal read_wav(const std::string& path);

/// Writes a RIFF/WAVE file readable by read_wav. The float32 path is
/// lossless; PCM16 saturates out-of-range samples and reports the count.
WavWriteInfo write_wav(const Signal& signal, const std::string& path, WavEncoding encoding);

/// Windowed-sinc polyphase resampler. Rates must lie in [8, 48] kHz.
/// Identity (bit-exact) when the target equals the source rate.
Signal resample(const Signal& signal, double target_rate);

struct SegmentSet {
  std::vector<Signal> segments;       // each peak-normalized
  std::vector<std::string> labels;
  std::uint64_t seed = 0;
};

/// Non-overlapping slices of `seconds` length, each peak-normalized to 1.0;
/// the remainder is dropped.
SegmentSet segment_normalize(const Signal& signal, double seconds = 3.0);

enum class NoiseKind { White, Pink, EngineHarmonics, ModulatedBabbleLike };

NoiseKind parse_noise_kind(const std::string& name);
std::string noise_kind_name(NoiseKind kind);

/// Deterministic synthetic noise, peak-normalized to 1.0.
///   pink: -3 dB/octave spectral slope
///   engine_harmonics: 80-120 Hz fundamental, 10 harmonics, broadband floor
///   modulated_babble_like: speech-band noise with 2-8 Hz amplitude modulation
Signal synth_noise(NoiseKind kind, double seconds, std::uint64_t seed,
                   double sample_rate = 16000.0);

/// FIR taps as CSV, one tap per line.
void write_fir_csv(const FIRCoeffs& fir, const std::string& path);
FIRCoeffs read_fir_csv(const std::string& path);

}  // namespace anc

#endif  // ANC_DATA_IO_HPP
