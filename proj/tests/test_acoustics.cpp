#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "anc/acoustics.hpp"
#include "anc/dsp.hpp"
#include "anc/rng.hpp"
#include "oracles.hpp"

using namespace anc;

namespace {
RoomSpec paper_room_secondary() {
  RoomSpec r;
  r.dimensions = {3.0, 4.0, 2.0};
  r.source_position = {1.5, 2.5, 1.0};
  r.mic_position = {1.5, 3.0, 1.0};
  r.t60 = 0.2;
  r.sample_rate = 16000.0;
  r.rir_length = 512;
  return r;
}
}  // namespace

TEST_CASE("sef closed form") {
  const double inf = linear_eta2();
  for (double y : {-3.0, -0.5, 0.0, 0.25, 7.0}) CHECK(sef(y, inf) == y);
  CHECK(sef(0.0, 0.5) == 0.0);
  CHECK(sef(10.0, 0.1) == doctest::Approx(std::sqrt(0.1 * oracle::kPi / 2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(sef(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(sef(1.0, -2.0), DomainError);
}

TEST_CASE("sef matches adaptive quadrature") {
  for (double eta2 : {0.1, 0.5, 2.0}) {
    for (int i = -20; i <= 20; ++i) {
      const double y = 0.5 * i;
      const double want = oracle::sef_quadrature(y, eta2);
      CHECK(std::fabs(sef(y, eta2) - want) <= 1e-9);
    }
  }
}

TEST_CASE("sef saturation, odd symmetry, boundedness") {
  for (double eta2 : {0.1, 0.5, 2.0}) {
    const double eta = std::sqrt(eta2);
    const double limit = eta * std::sqrt(oracle::kPi / 2.0);
    CHECK(std::fabs(sef(10.0 * eta, eta2) - limit) <= 1e-6);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const double y = rng.uniform(-50.0, 50.0);
      CHECK(sef(-y, eta2) == -sef(y, eta2));
      CHECK(std::fabs(sef(y, eta2)) <= limit + 1e-15);
    }
    // monotone: strict inside the active region, non-decreasing at the
    // saturated tails (erf rounds to +-1 there in double precision)
    double prev = sef(-5.0, eta2);
    for (double y = -4.9; y <= 5.0; y += 0.1) {
      const double cur = sef(y, eta2);
      if (std::fabs(y) <= eta) CHECK(cur > prev);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("sef_prime") {
  CHECK(sef_prime(0.0, 0.1) == 1.0);
  for (double y : {-4.0, 0.3, 9.0}) CHECK(sef_prime(y, linear_eta2()) == 1.0);
  const double fd = oracle::central_diff([](double y) { return sef(y, 0.5); }, 0.7, 1e-6);
  CHECK(std::fabs(sef_prime(0.7, 0.5) - fd) / fd <= 1e-6);
  CHECK(sef_prime(3.0, 0.5) > 0.0);
  CHECK(sef_prime(3.0, 0.5) <= 1.0);
  CHECK_THROWS_AS(sef_prime(1.0, -1.0), DomainError);
}

TEST_CASE("simulate_rir free field") {
  RoomSpec r = paper_room_secondary();
  const FIRCoeffs rir = simulate_rir(r, 0);
  REQUIRE(rir.size() == 512);

  // direct tap at round(16000 * 0.5 / 343) = 23
  std::size_t peak = 0;
  for (std::size_t i = 1; i < rir.size(); ++i)
    if (std::fabs(rir.taps[i]) > std::fabs(rir.taps[peak])) peak = i;
  CHECK(peak == 23);

  // windowed-sinc interpolation preserves the 1/(4 pi d) arrival amplitude
  double sum = 0.0;
  for (double t : rir.taps) sum += t;
  CHECK(sum == doctest::Approx(1.0 / (4.0 * oracle::kPi * 0.5)).epsilon(1e-3));

  // no energy outside the interpolation support around the arrival
  for (std::size_t i = 0; i < rir.size(); ++i)
    if (i + 41 < 23 || i > 23 + 41) CHECK(rir.taps[i] == 0.0);
}

TEST_CASE("simulate_rir reverberant physicality") {
  RoomSpec r = paper_room_secondary();
  const FIRCoeffs rir = simulate_rir(r);
  REQUIRE(rir.size() == 512);

  std::size_t peak = 0;
  for (std::size_t i = 1; i < rir.size(); ++i)
    if (std::fabs(rir.taps[i]) > std::fabs(rir.taps[peak])) peak = i;
  CHECK(peak >= 22);
  CHECK(peak <= 24);

  // Schroeder oracle self-check on a synthetic exponential tail with the
  // same length and decay target.
  {
    Rng rng(9);
    std::vector<double> synth(512, 0.0);
    synth[23] = 1.0;
    for (std::size_t i = 24; i < synth.size(); ++i) {
      const double t = static_cast<double>(i - 23) / 16000.0;
      synth[i] = 0.3 * rng.gaussian() * std::pow(10.0, -3.0 * t / 0.2);
    }
    const double t60 = oracle::schroeder_t60(synth, 16000.0);
    CHECK(t60 == doctest::Approx(0.2).epsilon(0.12));
  }

  const double t60 = oracle::schroeder_t60(rir.taps, 16000.0);
  INFO("fitted T60 = ", t60);
  CHECK(t60 >= 0.16);
  CHECK(t60 <= 0.24);

  // Schroeder curve is non-increasing by construction; spot-check it.
  double acc = 0.0;
  std::vector<double> edc(rir.size());
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir.taps[i] * rir.taps[i];
    edc[i] = acc;
  }
  for (std::size_t i = 1; i < edc.size(); ++i) CHECK(edc[i] <= edc[i - 1]);

  // deterministic
  const FIRCoeffs again = simulate_rir(r);
  CHECK(std::memcmp(again.taps.data(), rir.taps.data(), rir.size() * sizeof(double)) == 0);
}

TEST_CASE("simulate_rir errors") {
  RoomSpec r = paper_room_secondary();
  r.mic_position = r.source_position;
  CHECK_THROWS_AS(simulate_rir(r), DomainError);

  r = paper_room_secondary();
  r.source_position = {5.0, 1.0, 1.0};
  CHECK_THROWS_AS(simulate_rir(r), DomainError);

  r = paper_room_secondary();
  r.t60 = 0.0;
  CHECK_THROWS_AS(simulate_rir(r), DomainError);

  r = paper_room_secondary();
  r.t60 = 0.01;  // Sabine absorption >= 1 for this geometry
  CHECK_THROWS_AS(simulate_rir(r), DomainError);
}

TEST_CASE("plant_error") {
  Rng rng(21);
  const double fs = 16000.0;

  SUBCASE("zero control leaves the disturbance") {
    Signal x(oracle::random_vector(rng, 256), fs);
    Signal y(std::vector<double>(256, 0.0), fs);
    PlantModel plant;
    plant.primary = FIRCoeffs(oracle::random_vector(rng, 16));
    plant.secondary = FIRCoeffs(oracle::random_vector(rng, 16));
    plant.eta2 = 0.5;
    const Signal e = plant_error(x, y, plant);
    const Signal d = direct_convolve(x, plant.primary);
    CHECK(oracle::max_rel_err(e.samples, d.samples) == 0.0);
  }

  SUBCASE("perfect cancellation identity") {
    Signal x(oracle::random_vector(rng, 128), fs);
    Signal y = x;
    for (double& v : y.samples) v = -v;
    PlantModel plant;
    plant.primary = FIRCoeffs({1.0});
    plant.secondary = FIRCoeffs({1.0});
    plant.eta2 = linear_eta2();
    const Signal e = plant_error(x, y, plant);
    for (double v : e.samples) CHECK(v == 0.0);
  }

  SUBCASE("matches brute-force oracle through the quadrature SEF") {
    Signal x(oracle::random_vector(rng, 64), fs);
    Signal y(oracle::random_vector(rng, 64), fs);
    PlantModel plant;
    plant.primary = FIRCoeffs(oracle::random_vector(rng, 8));
    plant.secondary = FIRCoeffs(oracle::random_vector(rng, 8));
    plant.eta2 = 0.5;

    std::vector<double> fy(64);
    for (std::size_t i = 0; i < 64; ++i) fy[i] = oracle::sef_quadrature(y[i], 0.5);
    std::vector<double> want = oracle::conv_nested(x.samples, plant.primary.taps);
    std::vector<double> us = oracle::conv_nested(fy, plant.secondary.taps);
    for (std::size_t i = 0; i < want.size(); ++i) want[i] += us[i];

    const Signal e = plant_error(x, y, plant);
    CHECK(oracle::max_rel_err(e.samples, want) <= 1e-12);
  }

  SUBCASE("causality is bit-exact") {
    Signal x(oracle::random_vector(rng, 128), fs);
    Signal y(oracle::random_vector(rng, 128), fs);
    PlantModel plant;
    plant.primary = FIRCoeffs(oracle::random_vector(rng, 32));
    plant.secondary = FIRCoeffs(oracle::random_vector(rng, 32));
    plant.eta2 = 0.1;
    const Signal e1 = plant_error(x, y, plant);
    x.samples[100] += 5.0;
    y.samples[101] -= 3.0;
    const Signal e2 = plant_error(x, y, plant);
    CHECK(std::memcmp(e1.samples.data(), e2.samples.data(), 100 * sizeof(double)) == 0);
    CHECK(e1.samples[100] != e2.samples[100]);
  }

  SUBCASE("shape errors") {
    Signal x(oracle::random_vector(rng, 64), fs);
    Signal y(oracle::random_vector(rng, 63), fs);
    PlantModel plant;
    plant.primary = FIRCoeffs({1.0});
    plant.secondary = FIRCoeffs({1.0});
    CHECK_THROWS_AS(plant_error(x, y, plant), ShapeError);
    Signal y2(oracle::random_vector(rng, 64), 8000.0);
    CHECK_THROWS_AS(plant_error(x, y2, plant), ShapeError);
  }
}
