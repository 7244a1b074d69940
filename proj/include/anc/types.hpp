#ifndef ANC_TYPES_HPP
#define ANC_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace anc {

// Error taxonomy used across the library. CLI maps ConfigError/FormatError/
// IoError to exit code 2 and NumericalError (and anything else) to 3.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mono sampled waveform.
struct Signal {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  Signal() = default;
  Signal(std::vector<double> s, double fs) : samples(std::move(s)), sample_rate(fs) {}

  std::size_t size() const { return samples.size(); }
  double& operator[](std::size_t i) { return samples[i]; }
  double operator[](std::size_t i) const { return samples[i]; }

  bool all_finite() const {
    for (double v : samples)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// FIR filter taps (dimensionless gain per sample).
struct FIRCoeffs {
  std::vector<double> taps;

  FIRCoeffs() = default;
  explicit FIRCoeffs(std::vector<double> t) : taps(std::move(t)) {}
  FIRCoeffs(std::initializer_list<double> t) : taps(t) {}

  std::size_t size() const { return taps.size(); }
};

inline double energy(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

inline double peak_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace anc

#endif  // ANC_TYPES_HPP
