#ifndef ANC_ADAPTIVE_HPP
#define ANC_ADAPTIVE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "anc/acoustics.hpp"
#include "anc/types.hpp"

namespace anc {

/// State carried by the sample- and block-domain adaptive loops.
struct AdaptiveState {
  std::vector<double> weights;                     // w, length L
  double step_size = 0.0;                          // mu
  std::vector<double> reference_history;           // x ring, length L
  std::vector<double> filtered_reference_history;  // r ring, length L
  std::vector<double> power_estimates;             // per-bin, FD variants
  std::size_t block_size = 0;
};

struct RunReport {
  Signal error_signal;
  std::vector<double> final_weights;
  bool diverged = false;
  std::optional<std::size_t> converged_at;
};

struct RunOptions {
  std::vector<double> initial_weights;  // empty -> zeros
  double divergence_factor = 1e6;      // halt when sum e^2 exceeds this times sum d^2
  bool normalize = true;               // FD variants: per-bin power normalization
  std::vector<double> disturbance;     // empty -> computed as primary * x
};

/// Reference filtered through the (exact) secondary-path model: r = s_hat * x.
Signal filtered_reference(const Signal& x, const FIRCoeffs& s_hat);

/// One gradient-descent step: w[k] -= mu * e * r[n-k]. Exposed so the update
/// rule can be checked in isolation.
void lms_update(std::vector<double>& w, double mu, double e, const std::vector<double>& r,
                std::size_t n);

/// Time-domain filtered-reference LMS, closed loop, sample by sample.
RunReport td_fxlms_run(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                       const RunOptions& options = {});

/// TD-FxLMS with the reference pre-scaled per sample by the tanh-model
/// saturation slope sech^2(y/lambda). lambda -> inf recovers td_fxlms_run.
RunReport thf_fxlms_run(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                        double lambda, const RunOptions& options = {});

/// Frequency-domain block FxNLMS (overlap-save, per-bin normalized step,
/// gradient constraint). block must equal taps, a power of two.
RunReport fd_fxnlms_run(const Signal& x, const PlantModel& plant, std::size_t taps, double mu,
                        std::size_t block, double forgetting, const RunOptions& options = {});

/// Frequency-domain filtered-error LMS: error filtered through the adjoint
/// secondary path with compensating delay, per-bin whitening by running
/// reference power, updates accumulated over update_frames blocks.
RunReport fd_felms_whitened_run(const Signal& x, const PlantModel& plant, std::size_t taps,
                                double mu, std::size_t block, double forgetting,
                                std::size_t update_frames, const RunOptions& options = {});

/// Least-squares control filter from the normal equations
/// (R^T R + eps I) w = -R^T d, solved through the autocorrelation Toeplitz
/// structure with a Levinson recursion. The secondary-path model is linear
/// even when the plant saturates.
FIRCoeffs wiener_design(const Signal& x, const PlantModel& plant, std::size_t taps);

/// Same design against an explicit disturbance signal (reference-microphone
/// topologies where d is not primary * x).
FIRCoeffs wiener_design_explicit(const Signal& x, const std::vector<double>& d,
                                 const FIRCoeffs& secondary, std::size_t taps);

/// Solves T w = b for symmetric positive-definite Toeplitz T given its
/// first column. Throws NumericalError when the recursion degenerates.
std::vector<double> solve_sym_toeplitz(const std::vector<double>& first_col,
                                       const std::vector<double>& rhs);

}  // namespace anc

#endif  // ANC_ADAPTIVE_HPP
