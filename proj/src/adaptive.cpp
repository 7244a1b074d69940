#include "anc/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "anc/dsp.hpp"
#include "anc/fft.hpp"

namespace anc {

Signal filtered_reference(const Signal& x, const FIRCoeffs& s_hat) {
  if (s_hat.size() == 0) throw ShapeError("filtered_reference: empty secondary-path model");
  return direct_convolve(x, s_hat);
}

void lms_update(std::vector<double>& w, double mu, double e, const std::vector<double>& r,
                std::size_t n) {
  const std::size_t kmax = std::min(w.size() - 1, n);
  for (std::size_t k = 0; k <= kmax; ++k) w[k] -= mu * e * r[n - k];
}

namespace {

void check_run_inputs(const Signal& x, const PlantModel& plant, std::size_t taps, double mu) {
  if (!x.all_finite()) throw DomainError("adaptive run: non-finite input signal");
  if (taps == 0) throw ConfigError("adaptive run: need at least one tap");
  if (!(mu > 0.0)) throw ConfigError("adaptive run: step size must be positive");
  if (plant.primary.size() == 0 || plant.secondary.size() == 0)
    throw ShapeError("adaptive run: empty plant path");
}

std::vector<double> init_weights(const RunOptions& options, std::size_t taps) {
  if (options.initial_weights.empty()) return std::vector<double>(taps, 0.0);
  if (options.initial_weights.size() != taps)
    throw ShapeError("adaptive run: initial weight length mismatch");
  return options.initial_weights;
}

std::vector<double> disturbance_for(const Signal& x, const PlantModel& plant,
                                    const RunOptions& options) {
  if (options.disturbance.empty()) return fast_convolve(x.samples, plant.primary.taps);
  if (options.disturbance.size() != x.size())
    throw ShapeError("adaptive run: disturbance length mismatch");
  return options.disturbance;
}

// Shared sample-domain FxLMS engine; slope_fn models the loudspeaker slope
// used to modulate the reference (identity for the linear assumption).
template <typename SlopeFn>
RunReport fxlms_engine(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                       const RunOptions& options, SlopeFn&& slope_fn) {
  check_run_inputs(x, plant, taps, mu);
  const std::size_t n = x.size();
  const std::vector<double>& s = plant.secondary.taps;
  const std::size_t ks = s.size();

  const std::vector<double> d = disturbance_for(x, plant, options);
  const double d_energy = energy(d);
  const double e_budget = options.divergence_factor * d_energy;

  RunReport report;
  report.error_signal.sample_rate = x.sample_rate;
  report.error_signal.samples.reserve(n);

  std::vector<double> w = init_weights(options, taps);
  std::vector<double> r(n, 0.0);     // filtered (possibly modulated) reference
  std::vector<double> modx(n, 0.0);  // slope-scaled reference
  std::vector<double> fy(n, 0.0);    // loudspeaker output sef(y)

  double e_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // control output from current weights
    const std::size_t kw = std::min(taps - 1, i);
    double y = 0.0;
    for (std::size_t k = 0; k <= kw; ++k) y += w[k] * x.samples[i - k];
    if (!std::isfinite(y)) {
      report.diverged = true;
      break;
    }

    modx[i] = slope_fn(y) * x.samples[i];
    const std::size_t kr = std::min(ks - 1, i);
    double ri = 0.0;
    for (std::size_t j = 0; j <= kr; ++j) ri += s[j] * modx[i - j];
    r[i] = ri;

    fy[i] = sef(y, plant.eta2);
    double e = d[i];
    for (std::size_t j = 0; j <= kr; ++j) e += s[j] * fy[i - j];
    if (!std::isfinite(e)) {
      report.diverged = true;
      break;
    }
    report.error_signal.samples.push_back(e);
    e_energy += e * e;
    if (e_energy > e_budget) {
      report.diverged = true;
      break;
    }

    lms_update(w, mu, e, r, i);
  }

  report.final_weights = std::move(w);
  return report;
}

}  // namespace

RunReport td_fxlms_run(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                       const RunOptions& options) {
  return fxlms_engine(x, plant, taps, mu, options, [](double) { return 1.0; });
}

RunReport thf_fxlms_run(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                        double lambda, const RunOptions& options) {
  if (!(lambda > 0.0)) throw DomainError("thf_fxlms_run: lambda must be positive");
  return fxlms_engine(x, plant, taps, mu, options, [lambda](double y) {
    const double c = std::cosh(y / lambda);
    return 1.0 / (c * c);
  });
}

namespace {

// Common scaffolding for the two overlap-save block algorithms.
struct BlockLoop {
  std::size_t taps;
  std::size_t nfft;
  RealFft fft;
  std::vector<double> w;
  std::vector<std::complex<double>> w_freq;
  std::vector<double> scratch;

  BlockLoop(std::size_t l, std::vector<double> w0)
      : taps(l), nfft(2 * l), fft(2 * l), w(std::move(w0)) {
    refresh_weights();
  }

  void refresh_weights() { fft.forward(w, w_freq); }

  // y(n) = sum_k w(k) x(n-k) for one block via overlap-save.
  void control_block(const std::vector<double>& x, std::size_t n0, std::vector<double>& y_block) {
    segment(x, n0, scratch);
    std::vector<std::complex<double>> xf;
    fft.forward(scratch, xf);
    for (std::size_t i = 0; i < xf.size(); ++i) xf[i] *= w_freq[i];
    std::vector<double> full;
    fft.inverse(xf, full);
    y_block.assign(full.begin() + static_cast<std::ptrdiff_t>(taps), full.end());
  }

  // x[n0-taps .. n0+taps-1], zero outside the signal.
  void segment(const std::vector<double>& x, std::size_t n0, std::vector<double>& out) const {
    out.resize(nfft);
    for (std::size_t i = 0; i < nfft; ++i) {
      const long long src =
          static_cast<long long>(n0) - static_cast<long long>(taps) + static_cast<long long>(i);
      out[i] = (src >= 0 && src < static_cast<long long>(x.size()))
                   ? x[static_cast<std::size_t>(src)]
                   : 0.0;
    }
  }
};

constexpr double kPowerFloor = 1e-8;

}  // namespace

RunReport fd_fxnlms_run(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                        std::size_t block, double forgetting, const RunOptions& options) {
  check_run_inputs(x, plant, taps, mu);
  if (block != taps) throw ConfigError("fd_fxnlms_run: block must equal the filter length");
  if (taps == 0 || (taps & (taps - 1)) != 0)
    throw ConfigError("fd_fxnlms_run: filter length must be a power of two");
  if (!(forgetting > 0.0 && forgetting < 1.0))
    throw ConfigError("fd_fxnlms_run: forgetting must lie in (0, 1)");

  const std::size_t n = x.size();
  const std::vector<double>& s = plant.secondary.taps;
  const std::size_t ks = s.size();

  const std::vector<double> d = disturbance_for(x, plant, options);
  const std::vector<double> r = fast_convolve(x.samples, s);  // filtered reference
  const double e_budget = options.divergence_factor * energy(d);

  BlockLoop loop(taps, init_weights(options, taps));
  std::vector<double> power(loop.fft.bins(), kPowerFloor);

  RunReport report;
  report.error_signal.sample_rate = x.sample_rate;
  report.error_signal.samples.assign(n, 0.0);
  std::vector<double> fy(n, 0.0);
  std::vector<double> y_block, seg, grad_full;
  std::vector<std::complex<double>> rf, ef;

  double e_energy = 0.0;
  std::size_t produced = 0;
  for (std::size_t n0 = 0; n0 < n && !report.diverged; n0 += taps) {
    const std::size_t valid = std::min(taps, n - n0);
    loop.control_block(x.samples, n0, y_block);

    // plant through the saturating loudspeaker, sample by sample
    std::vector<double> e_block(taps, 0.0);
    for (std::size_t i = 0; i < valid; ++i) {
      const std::size_t idx = n0 + i;
      const double y = y_block[i];
      if (!std::isfinite(y)) {
        report.diverged = true;
        break;
      }
      fy[idx] = sef(y, plant.eta2);
      double e = d[idx];
      const std::size_t kr = std::min(ks - 1, idx);
      for (std::size_t j = 0; j <= kr; ++j) e += s[j] * fy[idx - j];
      if (!std::isfinite(e)) {
        report.diverged = true;
        break;
      }
      e_block[i] = e;
      report.error_signal.samples[idx] = e;
      e_energy += e * e;
      if (e_energy > e_budget) {
        report.diverged = true;
        break;
      }
      ++produced;
    }
    if (report.diverged) break;

    loop.segment(r, n0, seg);
    loop.fft.forward(seg, rf);
    std::vector<double> epad(2 * taps, 0.0);
    std::copy(e_block.begin(), e_block.end(), epad.begin() + static_cast<std::ptrdiff_t>(taps));
    loop.fft.forward(epad, ef);

    for (std::size_t k = 0; k < rf.size(); ++k) {
      const double p = std::norm(rf[k]);
      power[k] = forgetting * power[k] + (1.0 - forgetting) * p;
      std::complex<double> g = std::conj(rf[k]) * ef[k];
      if (options.normalize) g /= (power[k] + kPowerFloor);
      rf[k] = g;
    }
    loop.fft.inverse(rf, grad_full);
    for (std::size_t k = 0; k < taps; ++k) loop.w[k] -= mu * grad_full[k];
    loop.refresh_weights();
  }

  report.error_signal.samples.resize(produced);
  report.final_weights = std::move(loop.w);
  return report;
}

RunReport fd_felms_whitened_run(const Signal& x, const PlantModel& plant, std::size_t taps,
                                double mu, std::size_t block, double forgetting,
                                std::size_t update_frames, const RunOptions& options) {
  check_run_inputs(x, plant, taps, mu);
  if (block != taps) throw ConfigError("fd_felms_whitened_run: block must equal the filter length");
  if (taps == 0 || (taps & (taps - 1)) != 0)
    throw ConfigError("fd_felms_whitened_run: filter length must be a power of two");
  if (!(forgetting > 0.0 && forgetting < 1.0))
    throw ConfigError("fd_felms_whitened_run: forgetting must lie in (0, 1)");
  if (update_frames == 0) throw ConfigError("fd_felms_whitened_run: update_frames must be >= 1");

  const std::size_t n = x.size();
  const std::vector<double>& s = plant.secondary.taps;
  const std::size_t ks = s.size();

  const std::vector<double> d = disturbance_for(x, plant, options);
  const double e_budget = options.divergence_factor * energy(d);

  // Reference delayed by the adjoint-filter group delay ks-1.
  std::vector<double> x_delayed(n, 0.0);
  for (std::size_t i = ks - 1; i < n; ++i) x_delayed[i] = x.samples[i - (ks - 1)];

  std::vector<double> s_rev(s.rbegin(), s.rend());

  BlockLoop loop(taps, init_weights(options, taps));
  std::vector<double> power(loop.fft.bins(), kPowerFloor);
  std::vector<double> grad_acc(taps, 0.0);
  std::size_t frames_accumulated = 0;

  RunReport report;
  report.error_signal.sample_rate = x.sample_rate;
  report.error_signal.samples.assign(n, 0.0);
  std::vector<double> fy(n, 0.0);
  std::vector<double> ef_time(n, 0.0);  // error through reversed secondary path
  std::vector<double> y_block, seg, grad_full;
  std::vector<std::complex<double>> xf, ef;

  double e_energy = 0.0;
  std::size_t produced = 0;
  for (std::size_t n0 = 0; n0 < n && !report.diverged; n0 += taps) {
    const std::size_t valid = std::min(taps, n - n0);
    loop.control_block(x.samples, n0, y_block);

    std::vector<double> ef_block(taps, 0.0);
    for (std::size_t i = 0; i < valid; ++i) {
      const std::size_t idx = n0 + i;
      const double y = y_block[i];
      if (!std::isfinite(y)) {
        report.diverged = true;
        break;
      }
      fy[idx] = sef(y, plant.eta2);
      double e = d[idx];
      const std::size_t kr = std::min(ks - 1, idx);
      for (std::size_t j = 0; j <= kr; ++j) e += s[j] * fy[idx - j];
      if (!std::isfinite(e)) {
        report.diverged = true;
        break;
      }
      report.error_signal.samples[idx] = e;
      e_energy += e * e;
      if (e_energy > e_budget) {
        report.diverged = true;
        break;
      }
      ++produced;

      double efv = 0.0;
      for (std::size_t j = 0; j <= kr; ++j) efv += s_rev[j] * report.error_signal.samples[idx - j];
      ef_time[idx] = efv;
      ef_block[i] = efv;
    }
    if (report.diverged) break;

    loop.segment(x_delayed, n0, seg);
    loop.fft.forward(seg, xf);
    std::vector<double> epad(2 * taps, 0.0);
    std::copy(ef_block.begin(), ef_block.end(), epad.begin() + static_cast<std::ptrdiff_t>(taps));
    loop.fft.forward(epad, ef);

    for (std::size_t k = 0; k < xf.size(); ++k) {
      const double p = std::norm(xf[k]);
      power[k] = forgetting * power[k] + (1.0 - forgetting) * p;
      std::complex<double> g = std::conj(xf[k]) * ef[k];
      if (options.normalize) g /= (power[k] + kPowerFloor);
      xf[k] = g;
    }
    loop.fft.inverse(xf, grad_full);
    for (std::size_t k = 0; k < taps; ++k) grad_acc[k] += grad_full[k];
    if (++frames_accumulated >= update_frames) {
      const double scale = mu / static_cast<double>(update_frames);
      for (std::size_t k = 0; k < taps; ++k) loop.w[k] -= scale * grad_acc[k];
      std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
      frames_accumulated = 0;
      loop.refresh_weights();
    }
  }

  report.error_signal.samples.resize(produced);
  report.final_weights = std::move(loop.w);
  return report;
}

std::vector<double> solve_sym_toeplitz(const std::vector<double>& first_col,
                                       const std::vector<double>& rhs) {
  const std::size_t n = first_col.size();
  if (n == 0 || rhs.size() != n) throw ShapeError("solve_sym_toeplitz: size mismatch");
  if (!(first_col[0] > 0.0))
    throw NumericalError("solve_sym_toeplitz: non-positive diagonal");

  const double t0 = first_col[0];
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = first_col[i] / t0;

  // Forward vector f solves T_k f = e_1; backward vector is its reverse.
  std::vector<double> f{1.0};
  std::vector<double> sol{rhs[0] / t0};
  std::vector<double> fnew, bwd;

  for (std::size_t k = 2; k <= n; ++k) {
    double eps_f = 0.0, eps_x = 0.0;
    for (std::size_t i = 0; i < k - 1; ++i) {
      eps_f += t[k - 1 - i] * f[i];
      eps_x += t[k - 1 - i] * sol[i];
    }
    const double denom = 1.0 - eps_f * eps_f;
    if (!(denom > 1e-300))
      throw NumericalError(
          "solve_sym_toeplitz: recursion degenerated at order " + std::to_string(k) +
          " (reflection magnitude " + std::to_string(std::fabs(eps_f)) + ")");
    const double alpha = 1.0 / denom;
    const double beta = -eps_f * alpha;

    fnew.assign(k, 0.0);
    for (std::size_t i = 0; i < k - 1; ++i) fnew[i] = alpha * f[i];
    for (std::size_t i = 0; i < k - 1; ++i) fnew[i + 1] += beta * f[k - 2 - i];
    f = fnew;

    bwd.assign(f.rbegin(), f.rend());
    const double gap = rhs[k - 1] / t0 - eps_x;
    sol.push_back(0.0);
    for (std::size_t i = 0; i < k; ++i) sol[i] += gap * bwd[i];
  }
  return sol;
}

FIRCoeffs wiener_design_explicit(const Signal& x, const std::vector<double>& d,
                                 const FIRCoeffs& secondary, std::size_t taps) {
  if (taps == 0) throw ConfigError("wiener_design: need at least one tap");
  if (x.size() < 2 * taps) throw DomainError("wiener_design: signal too short for filter length");
  if (secondary.size() == 0) throw ShapeError("wiener_design: empty secondary path");
  if (d.size() != x.size()) throw ShapeError("wiener_design: disturbance length mismatch");

  const std::vector<double> r = fast_convolve(x.samples, secondary.taps);

  std::vector<double> rho = xcorr(r, r, taps);
  std::vector<double> cross = xcorr(r, d, taps);
  if (!(rho[0] > 0.0)) throw DomainError("wiener_design: zero reference power");

  rho[0] *= 1.0 + 1e-8;  // diagonal loading
  for (double& c : cross) c = -c;
  std::vector<double> w = solve_sym_toeplitz(rho, cross);
  for (double v : w)
    if (!std::isfinite(v)) throw NumericalError("wiener_design: non-finite solution");
  return FIRCoeffs(std::move(w));
}

FIRCoeffs wiener_design(const Signal& x, const PlantModel& plant, std::size_t taps) {
  if (plant.primary.size() == 0) throw ShapeError("wiener_design: empty primary path");
  return wiener_design_explicit(x, fast_convolve(x.samples, plant.primary.taps), plant.secondary,
                                taps);
}

}  // namespace anc
