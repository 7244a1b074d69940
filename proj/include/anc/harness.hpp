#ifndef ANC_HARNESS_HPP
#define ANC_HARNESS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anc/adaptive.hpp"
#include "anc/dsp.hpp"
#include "anc/types.hpp"

namespace anc {

struct AlgorithmSpec {
  std::string label;        // report label, from the config section name
  std::string type;         // td_fxlms | thf_fxlms | fd_fxnlms | fd_felms | wiener | wavenet_vnn
  std::size_t taps = 512;
  double mu = 0.0;          // 0 -> step-size search
  double forgetting = 0.95;
  std::size_t update_frames = 4;
  double lambda = 0.0;      // 0 -> sqrt(eta2*pi/2)
  std::string checkpoint;   // wavenet_vnn only
};

struct StepSearchSpec {
  bool enabled = true;
  double bracket_scale = 1e-4;  // lower bracket = scale * stability estimate
  std::size_t iterations = 20;
  std::size_t passes = 3;       // convergence passes per probe
};

struct RoomGeometry {
  std::array<double, 3> dimensions{3.0, 4.0, 2.0};
  std::array<double, 3> noise_source{1.5, 1.0, 1.0};
  std::array<double, 3> ref_mic{1.5, 1.0, 1.0};
  std::array<double, 3> control_source{1.5, 2.5, 1.0};
  std::array<double, 3> error_mic{1.5, 3.0, 1.0};
  double t60 = 0.2;
  std::size_t path_length = 512;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  double sample_rate = 16000.0;
  double test_seconds = 10.0;
  std::vector<std::string> noises;   // synth kind names, or wav:<path>
  std::vector<double> eta2_grid;     // infinity = linear
  std::vector<AlgorithmSpec> algorithms;
  RoomGeometry room;
  StepSearchSpec step_search;
  std::string reference_mode = "source";  // or "ref_mic"
  std::size_t max_passes = 30;
  std::size_t workers = 1;
  bool export_error_wav = false;
  bool export_weights = false;
};

struct ResultRow {
  MetricsReport metrics;
  std::string status;  // "ok" or a failure note
  double mu_used = 0.0;
  std::optional<std::size_t> converged_at;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::uint64_t config_hash = 0;
  std::string code_version;
  std::string timestamp;
};

/// Parses the flat-key INI schema documented in the README.
ExperimentConfig load_experiment_config(const std::string& path);

/// Hash over the canonical serialization of every config field.
std::uint64_t experiment_config_hash(const ExperimentConfig& config);

/// Image-method plant for the configured geometry: primary path
/// noise-source -> error mic, secondary path control-source -> error mic,
/// primary peak-normalized to 1 with the secondary scaled by the same factor.
PlantModel build_plant(const RoomGeometry& room, double sample_rate, double eta2);

/// Test signal for a noise label (synth kind or wav:<path>), peak-normalized.
Signal make_noise(const ExperimentConfig& config, const std::string& label);

std::string eta2_label(double eta2);

/// Runs the full (algorithm x noise x eta2) grid. Deterministic given the
/// config seed; failed cells carry a status note instead of being dropped.
ResultsTable run_experiment(const ExperimentConfig& config);

struct EmittedFiles {
  std::string csv_path;
  std::string text_path;
};

/// results.csv (deterministic bytes) plus an aligned-text report with the
/// run metadata header.
EmittedFiles emit_results(const ResultsTable& table, const std::string& output_dir);

/// Before/after spectrogram CSVs (ANC off = disturbance, ANC on = error).
void export_cell_spectrograms(const Signal& d, const Signal& e, std::size_t frame, std::size_t hop,
                              const std::string& output_dir, const std::string& prefix);

using RunnerFn = std::function<RunReport(const Signal& x, const PlantModel& plant, double mu,
                                         const std::vector<double>& initial_weights)>;

struct ConvergenceResult {
  RunReport report;
  double steady_nmse_db = 0.0;  // last-20% window of the final pass
  double full_nmse_db = 0.0;    // entire final pass
  std::size_t passes = 0;
  bool diverged = false;
  std::optional<std::size_t> converged_at;
};

/// Repeated passes over the same signal (weights carried over) until the
/// last-20% NMSE moves by less than 0.1 dB between passes.
ConvergenceResult run_to_convergence(const RunnerFn& runner, const Signal& x,
                                     const PlantModel& plant, double mu, std::size_t max_passes);

/// Golden-section minimization over log(mu); returns the best mu probed.
double golden_section_mu(const std::function<double(double)>& objective_db, double mu_lo,
                         double mu_hi, std::size_t iterations);

/// 2 / (L * mean filtered-reference power): classical stability estimate.
double fxlms_stability_estimate(const Signal& x, const PlantModel& plant, std::size_t taps);

}  // namespace anc

#endif  // ANC_HARNESS_HPP
