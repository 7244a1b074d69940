#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anc/dsp.hpp"
#include "anc/fft.hpp"
#include "anc/rng.hpp"
#include "oracles.hpp"

using namespace anc;

namespace {
Signal make_signal(std::vector<double> v, double fs = 16000.0) { return Signal(std::move(v), fs); }

Signal tone(double freq, double seconds, double fs, double amp = 1.0) {
  const std::size_t n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = amp * std::sin(2.0 * oracle::kPi * freq * static_cast<double>(i) / fs);
  return Signal(std::move(v), fs);
}
}  // namespace

TEST_CASE("direct_convolve identities") {
  Signal x = make_signal({1.0, 2.0, 3.0});
  CHECK(direct_convolve(x, FIRCoeffs({1.0})).samples == x.samples);
  auto delayed = direct_convolve(x, FIRCoeffs({0.0, 1.0}));
  CHECK(delayed.samples == std::vector<double>{0.0, 1.0, 2.0});
  CHECK_THROWS_AS(direct_convolve(make_signal({}), FIRCoeffs({1.0})), ShapeError);
  CHECK_THROWS_AS(direct_convolve(x, FIRCoeffs({})), ShapeError);
}

TEST_CASE("direct_convolve matches nested-loop oracle") {
  Rng rng(11);
  auto x = oracle::random_vector(rng, 1000);
  auto h = oracle::random_vector(rng, 64);
  auto got = direct_convolve(x, h);
  auto want = oracle::conv_nested(x, h);
  CHECK(oracle::max_rel_err(got, want) <= 1e-12);
}

TEST_CASE("fast_convolve equals direct_convolve") {
  Rng rng(12);
  SUBCASE("large") {
    auto x = oracle::random_vector(rng, 16384);
    auto h = oracle::random_vector(rng, 512);
    CHECK(oracle::max_rel_err(fast_convolve(x, h), direct_convolve(x, h)) <= 1e-9);
  }
  SUBCASE("identity kernel") {
    auto x = oracle::random_vector(rng, 777);
    auto got = fast_convolve(x, {1.0});
    CHECK(oracle::max_rel_err(got, x) <= 1e-12);
  }
  SUBCASE("input shorter than one block") {
    auto x = oracle::random_vector(rng, 100);
    auto h = oracle::random_vector(rng, 512);
    CHECK(oracle::max_rel_err(fast_convolve(x, h), direct_convolve(x, h)) <= 1e-9);
  }
  SUBCASE("random size property") {
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t nx = 1 + static_cast<std::size_t>(rng.uniform(0, 3000));
      const std::size_t nh = 1 + static_cast<std::size_t>(rng.uniform(0, 200));
      auto x = oracle::random_vector(rng, nx);
      auto h = oracle::random_vector(rng, nh);
      CHECK(oracle::max_rel_err(fast_convolve(x, h), direct_convolve(x, h)) <= 1e-9);
    }
  }
}

TEST_CASE("xcorr matches nested loops") {
  Rng rng(13);
  auto a = oracle::random_vector(rng, 300);
  auto b = oracle::random_vector(rng, 280);
  auto got = xcorr(a, b, 32);
  for (std::size_t m = 0; m < 32; ++m) {
    double want = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
      if (n + m < b.size()) want += a[n] * b[n + m];
    CHECK(std::fabs(got[m] - want) <= 1e-9 * (1.0 + std::fabs(want)));
  }
}

TEST_CASE("a_weighting_fir tracks the analog curve") {
  const double fs = 16000.0;
  const FIRCoeffs a = a_weighting_fir(fs, 257);
  REQUIRE(a.size() == 257);

  // 0 dB at 1 kHz by construction.
  CHECK(std::fabs(oracle::fir_gain_db(a.taps, 1000.0, fs)) <= 0.2);

  for (double f : {63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0}) {
    const double err = oracle::fir_gain_db(a.taps, f, fs) - oracle::analog_a_weight_db(f);
    INFO("f=", f, " err=", err);
    CHECK(std::fabs(err) <= 0.5);
  }
  CHECK(std::fabs(oracle::fir_gain_db(a.taps, 100.0, fs) - (-19.1)) <= 0.5);
  CHECK(oracle::fir_gain_db(a.taps, 20.0, fs) <= -45.0);

  CHECK_THROWS_AS(a_weighting_fir(fs, 128), DomainError);
  CHECK_THROWS_AS(a_weighting_fir(96000.0, 257), DomainError);
}

TEST_CASE("nmse_db identities") {
  Rng rng(14);
  Signal d = make_signal(oracle::random_vector(rng, 500));
  CHECK(nmse_db(d, d) == doctest::Approx(0.0).epsilon(1e-12));

  Signal e = d;
  for (double& v : e.samples) v /= std::sqrt(10.0);
  CHECK(nmse_db(e, d) == doctest::Approx(-10.0).epsilon(1e-9));

  Signal zero = make_signal(std::vector<double>(500, 0.0));
  CHECK(nmse_db(zero, d) == kMetricFloorDb);
  CHECK_THROWS_AS(nmse_db(d, zero), DomainError);
  CHECK_THROWS_AS(nmse_db(d, make_signal({1.0})), ShapeError);

  // scale invariance
  Signal e2 = d, d2 = d;
  for (double& v : e2.samples) v *= 3.7;
  for (double& v : d2.samples) v *= 3.7;
  CHECK(nmse_db(e2, d2) == doctest::Approx(nmse_db(d, d)).epsilon(1e-12));
}

TEST_CASE("dba_delta_db identities and tone weighting") {
  Rng rng(15);
  Signal d = make_signal(oracle::random_vector(rng, 4000));
  CHECK(dba_delta_db(d, d) == doctest::Approx(0.0).epsilon(1e-12));

  Signal half = d;
  for (double& v : half.samples) v *= 0.5;
  CHECK(dba_delta_db(half, d) == doctest::Approx(-6.020599913).epsilon(1e-9));

  // 100 Hz error tone vs 1 kHz disturbance tone of equal power
  Signal e = tone(100.0, 2.0, 16000.0);
  Signal dt = tone(1000.0, 2.0, 16000.0);
  CHECK(std::fabs(dba_delta_db(e, dt) - (-19.1)) <= 0.5);

  Signal se = d, sd = d;
  for (double& v : se.samples) v *= 0.01;
  for (double& v : sd.samples) v *= 0.01;
  CHECK(dba_delta_db(se, sd) == doctest::Approx(dba_delta_db(d, d)).epsilon(1e-9));
}

TEST_CASE("stft_spectrogram") {
  SUBCASE("pure tone peaks at the expected bin") {
    Signal x = tone(1000.0, 1.0, 16000.0);
    auto s = stft_spectrogram(x, 512, 256);
    REQUIRE(s.bins() == 257);
    for (const auto& row : s.magnitudes_db) {
      std::size_t peak = 0;
      for (std::size_t k = 1; k < row.size(); ++k)
        if (row[k] > row[peak]) peak = k;
      CHECK(peak == 32);  // 1000 * 512 / 16000
    }
  }
  SUBCASE("zero signal sits at the floor") {
    Signal x = make_signal(std::vector<double>(2048, 0.0));
    auto s = stft_spectrogram(x, 512, 512);
    for (const auto& row : s.magnitudes_db)
      for (double v : row) CHECK(v == kSpectrogramFloorDb);
  }
  SUBCASE("per-frame Parseval") {
    Rng rng(16);
    Signal x = make_signal(oracle::random_vector(rng, 2048));
    const std::size_t frame = 512, hop = 256;
    auto s = stft_spectrogram(x, frame, hop);
    std::vector<double> window(frame);
    for (std::size_t i = 0; i < frame; ++i)
      window[i] = 0.5 * (1.0 - std::cos(2.0 * oracle::kPi * static_cast<double>(i) / frame));
    for (std::size_t f = 0; f < s.frames(); ++f) {
      double time_power = 0.0;
      for (std::size_t i = 0; i < frame; ++i) {
        const double w = x[f * hop + i] * window[i];
        time_power += w * w;
      }
      double freq_power = 0.0;
      for (std::size_t k = 0; k < s.bins(); ++k) {
        const double mag = std::pow(10.0, s.magnitudes_db[f][k] / 20.0);
        const double m2 = mag * mag;
        freq_power += (k == 0 || k == s.bins() - 1) ? m2 : 2.0 * m2;
      }
      freq_power /= static_cast<double>(frame);
      CHECK(std::fabs(freq_power - time_power) <= 1e-9 * time_power);
    }
  }
  SUBCASE("errors") {
    Signal x = make_signal(std::vector<double>(100, 0.0));
    CHECK_THROWS_AS(stft_spectrogram(x, 512, 256), ShapeError);
    Signal y = make_signal(std::vector<double>(2048, 0.0));
    CHECK_THROWS_AS(stft_spectrogram(y, 500, 256), ConfigError);
    CHECK_THROWS_AS(stft_spectrogram(y, 512, 0), ConfigError);
    CHECK_THROWS_AS(stft_spectrogram(y, 512, 1024), ConfigError);
  }
}
