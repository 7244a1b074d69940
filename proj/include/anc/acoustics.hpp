#ifndef ANC_ACOUSTICS_HPP
#define ANC_ACOUSTICS_HPP

#include <array>
#include <cstddef>
#include <limits>

#include "anc/types.hpp"

namespace anc {

/// Shoebox room for the image-method RIR generator.
struct RoomSpec {
  std::array<double, 3> dimensions{3.0, 4.0, 2.0};     // meters
  std::array<double, 3> source_position{1.5, 2.5, 1.0};
  std::array<double, 3> mic_position{1.5, 3.0, 1.0};
  double t60 = 0.2;                // seconds
  double speed_of_sound = 343.0;   // m/s
  double sample_rate = 16000.0;    // Hz
  std::size_t rir_length = 512;    // taps
};

/// eta2 = infinity selects the exactly linear loudspeaker.
inline double linear_eta2() { return std::numeric_limits<double>::infinity(); }

/// Feedforward plant: primary path p, secondary path s, loudspeaker
/// saturation strength eta2 (smaller = more nonlinear).
struct PlantModel {
  FIRCoeffs primary;
  FIRCoeffs secondary;
  double eta2 = linear_eta2();

  bool is_linear() const { return std::isinf(eta2); }
};

/// Image-method room impulse response. Amplitudes follow 1/(4*pi*d)
/// spherical spreading; fractional arrival times are realized with a
/// Hann-windowed sinc. Wall reflection coefficient comes from Sabine's
/// formula for the requested t60. max_order < 0 selects an order large
/// enough to cover the RIR length; max_order = 0 gives the free-field
/// direct path only.
FIRCoeffs simulate_rir(const RoomSpec& room, int max_order = -1);

/// Saturating loudspeaker: integral of exp(-x^2/(2*eta2)) from 0 to y,
/// in closed form. Odd in y, bounded by sqrt(eta2*pi/2).
double sef(double y, double eta2);

/// d/dy of sef: exp(-y^2/(2*eta2)), in (0, 1].
double sef_prime(double y, double eta2);

/// Pointwise sef over a signal.
Signal apply_sef(const Signal& y, double eta2);

/// Error-microphone signal e = p*x + s*sef(y), causal, truncated to the
/// input length. Bit-exact causal (time-domain convolution).
Signal plant_error(const Signal& x, const Signal& y, const PlantModel& plant);

}  // namespace anc

#endif  // ANC_ACOUSTICS_HPP
