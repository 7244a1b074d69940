#include "anc/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "anc/dsp.hpp"

namespace anc {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kSincHalfWidth = 40;  // taps on each side of a fractional arrival

void validate_room(const RoomSpec& room) {
  for (int i = 0; i < 3; ++i) {
    if (!(room.dimensions[i] > 0.0)) throw DomainError("simulate_rir: non-positive room dimension");
    if (!(room.source_position[i] > 0.0 && room.source_position[i] < room.dimensions[i]))
      throw DomainError("simulate_rir: source position outside room");
    if (!(room.mic_position[i] > 0.0 && room.mic_position[i] < room.dimensions[i]))
      throw DomainError("simulate_rir: mic position outside room");
  }
  if (!(room.t60 > 0.0)) throw DomainError("simulate_rir: t60 must be positive");
  if (!(room.sample_rate > 0.0)) throw DomainError("simulate_rir: sample rate must be positive");
  if (room.rir_length == 0) throw DomainError("simulate_rir: rir_length must be positive");
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = room.source_position[i] - room.mic_position[i];
    d2 += d * d;
  }
  if (d2 == 0.0) throw DomainError("simulate_rir: degenerate geometry (source coincides with mic)");
}

// Hann-windowed sinc centered at fractional position `center`, accumulated
// into the RIR with the given amplitude.
void add_arrival(std::vector<double>& rir, double center, double amplitude) {
  const int lo = std::max(0, static_cast<int>(std::ceil(center)) - kSincHalfWidth);
  const int hi = std::min(static_cast<int>(rir.size()) - 1,
                          static_cast<int>(std::floor(center)) + kSincHalfWidth);
  for (int n = lo; n <= hi; ++n) {
    const double t = static_cast<double>(n) - center;
    double sinc = 1.0;
    if (t != 0.0) sinc = std::sin(kPi * t) / (kPi * t);
    const double win = 0.5 * (1.0 + std::cos(kPi * t / (kSincHalfWidth + 1)));
    rir[n] += amplitude * sinc * win;
  }
}
}  // namespace

FIRCoeffs simulate_rir(const RoomSpec& room, int max_order) {
  validate_room(room);

  const auto& L = room.dimensions;
  const double volume = L[0] * L[1] * L[2];
  const double surface = 2.0 * (L[0] * L[1] + L[0] * L[2] + L[1] * L[2]);

  // Sabine absorption -> wall reflection coefficient, shared by all walls.
  double beta = 0.0;
  if (max_order != 0) {
    const double alpha = 24.0 * std::log(10.0) * volume / (room.speed_of_sound * surface * room.t60);
    if (alpha >= 1.0)
      throw DomainError("simulate_rir: t60 too short for this geometry (Sabine absorption >= 1)");
    beta = std::sqrt(1.0 - alpha);
  }

  // Images beyond the RIR window (plus interpolation margin) cannot land
  // inside the buffer.
  const double max_dist =
      room.speed_of_sound * (static_cast<double>(room.rir_length) + kSincHalfWidth + 1) /
      room.sample_rate;

  std::array<int, 3> n_max{};
  for (int i = 0; i < 3; ++i) {
    int n = static_cast<int>(std::ceil(max_dist / (2.0 * L[i]))) + 1;
    if (max_order >= 0) n = std::min(n, max_order);
    n_max[i] = n;
  }

  std::vector<double> rir(room.rir_length, 0.0);
  const double fs_over_c = room.sample_rate / room.speed_of_sound;

  for (int nx = -n_max[0]; nx <= n_max[0]; ++nx)
    for (int ny = -n_max[1]; ny <= n_max[1]; ++ny)
      for (int nz = -n_max[2]; nz <= n_max[2]; ++nz)
        for (int px = 0; px <= 1; ++px)
          for (int py = 0; py <= 1; ++py)
            for (int pz = 0; pz <= 1; ++pz) {
              const int refl = std::abs(nx - px) + std::abs(nx) + std::abs(ny - py) +
                               std::abs(ny) + std::abs(nz - pz) + std::abs(nz);
              if (max_order >= 0 && refl > max_order) continue;
              const double ix =
                  (1 - 2 * px) * room.source_position[0] + 2.0 * nx * L[0] - room.mic_position[0];
              const double iy =
                  (1 - 2 * py) * room.source_position[1] + 2.0 * ny * L[1] - room.mic_position[1];
              const double iz =
                  (1 - 2 * pz) * room.source_position[2] + 2.0 * nz * L[2] - room.mic_position[2];
              const double dist = std::sqrt(ix * ix + iy * iy + iz * iz);
              if (dist * fs_over_c >
                  static_cast<double>(room.rir_length) + kSincHalfWidth)
                continue;
              const double amp = std::pow(beta, refl) / (4.0 * kPi * dist);
              add_arrival(rir, dist * fs_over_c, amp);
            }

  return FIRCoeffs(std::move(rir));
}

double sef(double y, double eta2) {
  if (std::isinf(eta2)) return y;
  if (!(eta2 > 0.0)) throw DomainError("sef: eta2 must be positive or infinite");
  const double eta = std::sqrt(eta2);
  return eta * std::sqrt(kPi / 2.0) * std::erf(y / (eta * std::sqrt(2.0)));
}

double sef_prime(double y, double eta2) {
  if (std::isinf(eta2)) return 1.0;
  if (!(eta2 > 0.0)) throw DomainError("sef_prime: eta2 must be positive or infinite");
  return std::exp(-y * y / (2.0 * eta2));
}

Signal apply_sef(const Signal& y, double eta2) {
  Signal out = y;
  if (std::isinf(eta2)) return out;
  if (!(eta2 > 0.0)) throw DomainError("apply_sef: eta2 must be positive or infinite");
  const double eta = std::sqrt(eta2);
  const double scale = eta * std::sqrt(kPi / 2.0);
  const double inv = 1.0 / (eta * std::sqrt(2.0));
  for (double& v : out.samples) v = scale * std::erf(v * inv);
  return out;
}

Signal plant_error(const Signal& x, const Signal& y, const PlantModel& plant) {
  if (x.size() != y.size()) throw ShapeError("plant_error: x and y length mismatch");
  if (x.sample_rate != y.sample_rate) throw ShapeError("plant_error: sample rate mismatch");
  if (plant.primary.size() == 0 || plant.secondary.size() == 0)
    throw ShapeError("plant_error: empty path");

  Signal d = direct_convolve(x, plant.primary);
  Signal u = direct_convolve(apply_sef(y, plant.eta2), plant.secondary);
  for (std::size_t i = 0; i < d.size(); ++i) d.samples[i] += u.samples[i];
  return d;
}

}  // namespace anc
