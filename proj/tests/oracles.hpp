// Independent reference implementations used only by tests: brute-force
// convolution, adaptive quadrature, Schroeder decay fitting, dense Volterra
// and least-squares solves, finite differences, tone measurement.
#ifndef ANC_TESTS_ORACLES_HPP
#define ANC_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "anc/rng.hpp"
#include "anc/types.hpp"

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

// Textbook O(N*K) causal convolution.
inline std::vector<double> conv_nested(const std::vector<double>& x, const std::vector<double>& h) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n)
    for (std::size_t k = 0; k < h.size(); ++k)
      if (n >= k) out[n] += h[k] * x[n - k];
  return out;
}

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Quadrature evaluation of the loudspeaker saturation integral.
inline double sef_quadrature(double y, double eta2, double tol = 1e-13) {
  return integrate([eta2](double x) { return std::exp(-x * x / (2.0 * eta2)); }, 0.0, y, tol);
}

// Schroeder backward integration with a fixed fit window: from just after
// the direct arrival to 70% of the RIR (the last stretch is contaminated by
// truncation). Returns the fitted T60 in seconds.
inline double schroeder_t60(const std::vector<double>& rir, double fs) {
  const std::size_t n = rir.size();
  std::vector<double> edc(n);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  std::size_t direct = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::fabs(rir[i]) > std::fabs(rir[direct])) direct = i;

  const std::size_t lo = direct + static_cast<std::size_t>(0.002 * fs);
  const std::size_t hi = (n * 7) / 10;
  if (hi <= lo + 8) throw std::runtime_error("schroeder_t60: RIR too short for the fit window");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double norm = edc[0];
  std::size_t count = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double db = 10.0 * std::log10(edc[i] / norm);
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -60.0 / slope;
}

// Dense second-order Volterra evaluation: y(n) = sum_ij W2(i,j) x(n-i) x(n-j).
inline std::vector<double> dense_volterra2(const std::vector<double>& x,
                                           const std::vector<std::vector<double>>& w2) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n)
    for (std::size_t i = 0; i < w2.size(); ++i)
      for (std::size_t j = 0; j < w2[i].size(); ++j)
        if (n >= i && n >= j) out[n] += w2[i][j] * x[n - i] * x[n - j];
  return out;
}

// Independent copy of the analog A-weighting response (dB re 1 kHz).
inline double analog_a_weight_db(double f) {
  const double f1 = 20.598997, f2 = 107.65265, f3 = 737.86223, f4 = 12194.217;
  auto ra = [&](double q) {
    const double q2 = q * q;
    return (f4 * f4 * q2 * q2) /
           ((q2 + f1 * f1) * std::sqrt((q2 + f2 * f2) * (q2 + f3 * f3)) * (q2 + f4 * f4));
  };
  return 20.0 * std::log10(ra(f) / ra(1000.0));
}

// DTFT magnitude of an FIR at one frequency.
inline double fir_gain_db(const std::vector<double>& taps, double f, double fs) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double w = 2.0 * kPi * f * static_cast<double>(k) / fs;
    acc += taps[k] * std::complex<double>(std::cos(w), -std::sin(w));
  }
  return 20.0 * std::log10(std::abs(acc));
}

inline std::vector<double> random_vector(anc::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& q : v) q = scale * rng.gaussian();
  return v;
}

inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
  double scale = 0.0;
  for (double v : want) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) scale = 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    worst = std::max(worst, std::fabs(got[i] - want[i]) / scale);
  return worst;
}

inline double tone_power(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x0, double h) {
  return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

// Gradient-check relative error with an absolute floor for dead parameters.
inline double gradcheck_rel_err(double analytic, double numeric, double floor_abs = 1e-8) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor_abs});
  return std::fabs(analytic - numeric) / denom;
}

}  // namespace oracle

#endif  // ANC_TESTS_ORACLES_HPP
