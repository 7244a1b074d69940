// Command-line front end: RIR generation, benchmark grids, Wiener designs,
// controller training/evaluation, and spectrogram export.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anc/acoustics.hpp"
#include "anc/adaptive.hpp"
#include "anc/data_io.hpp"
#include "anc/dsp.hpp"
#include "anc/harness.hpp"
#include "anc/rng.hpp"
#include "anc/wavenet.hpp"

namespace {

std::array<double, 3> parse_triple_arg(const std::string& s, const std::string& name) {
  std::array<double, 3> out{};
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &out[0], &out[1], &out[2]) != 3)
    throw anc::ConfigError(name + ": expected three comma-separated numbers, got '" + s + "'");
  return out;
}

double parse_eta2_arg(const std::string& s) {
  if (s == "inf" || s == "infinity") return anc::linear_eta2();
  return std::stod(s);
}

anc::Signal cli_noise(const std::string& label, double seconds, std::uint64_t seed, double fs) {
  if (label.rfind("wav:", 0) == 0) {
    anc::Signal x = anc::read_wav(label.substr(4));
    x = anc::resample(x, fs);
    const double peak = anc::peak_abs(x.samples);
    if (peak <= 0.0) throw anc::DomainError("silent wav file: " + label);
    for (double& v : x.samples) v /= peak;
    return x;
  }
  return anc::synth_noise(anc::parse_noise_kind(label), seconds,
                          anc::derive_seed(seed, "noise:" + label), fs);
}

int run_main(int argc, char** argv) {
  CLI::App app{"Nonlinear active noise control benchmark toolkit"};
  app.require_subcommand(1);

  // --- rir ---
  auto* rir_cmd = app.add_subcommand("rir", "Generate a room impulse response");
  std::string rir_dims = "3,4,2", rir_src = "1.5,2.5,1", rir_mic = "1.5,3,1";
  double rir_t60 = 0.2, rir_fs = 16000.0;
  std::size_t rir_len = 512;
  bool rir_free_field = false;
  std::string rir_out;
  rir_cmd->add_option("--dims", rir_dims, "Room dimensions (m), comma triple");
  rir_cmd->add_option("--src", rir_src, "Source position (m)");
  rir_cmd->add_option("--mic", rir_mic, "Microphone position (m)");
  rir_cmd->add_option("--t60", rir_t60, "Reverberation time (s)");
  rir_cmd->add_option("--fs", rir_fs, "Sample rate (Hz)");
  rir_cmd->add_option("--length", rir_len, "RIR length (taps)");
  rir_cmd->add_flag("--free-field", rir_free_field, "Direct path only (no reflections)");
  rir_cmd->add_option("--out", rir_out, "Output path (.wav or .csv)")->required();

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "Run a benchmark grid from a config file");
  std::string run_config, run_outdir;
  run_cmd->add_option("--config", run_config, "INI config file")->required();
  run_cmd->add_option("--output-dir", run_outdir, "Override output directory");

  // --- wiener ---
  auto* wiener_cmd = app.add_subcommand("wiener", "One-shot Wiener control-filter design");
  std::string wiener_noise = "pink", wiener_eta2 = "inf", wiener_out;
  double wiener_seconds = 10.0;
  std::size_t wiener_taps = 512;
  std::uint64_t wiener_seed = 0;
  wiener_cmd->add_option("--noise", wiener_noise, "Noise kind or wav:<path>");
  wiener_cmd->add_option("--seconds", wiener_seconds, "Synthetic noise duration (s)");
  wiener_cmd->add_option("--taps", wiener_taps, "Filter length");
  wiener_cmd->add_option("--eta2", wiener_eta2, "Loudspeaker eta^2 (inf = linear)");
  wiener_cmd->add_option("--seed", wiener_seed, "Noise seed");
  wiener_cmd->add_option("--out", wiener_out, "Write designed taps as CSV");

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "Train the WaveNet-VNN controller");
  std::string train_noises = "pink,engine_harmonics", train_eta2 = "0.5", train_outdir = ".";
  double train_seconds = 30.0, train_lr = 1e-3;
  std::size_t train_epochs = 30;
  std::uint64_t train_seed = 0;
  std::size_t t_stacks = 2, t_layers = 8, t_channels = 8, t_skip = 8, t_vnn_len = 8;
  train_cmd->add_option("--noises", train_noises, "Comma list of noise kinds or wav:<path>");
  train_cmd->add_option("--seconds", train_seconds, "Duration per noise source (s)");
  train_cmd->add_option("--eta2", train_eta2, "Training nonlinearity (inf = linear)");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs");
  train_cmd->add_option("--lr", train_lr, "Adam learning rate");
  train_cmd->add_option("--seed", train_seed, "Seed (init, shuffle, noise)");
  train_cmd->add_option("--stacks", t_stacks, "Dilation stacks");
  train_cmd->add_option("--layers-per-stack", t_layers, "Layers per stack");
  train_cmd->add_option("--channels", t_channels, "Residual channels");
  train_cmd->add_option("--skip-channels", t_skip, "Skip channels");
  train_cmd->add_option("--vnn-len", t_vnn_len, "VNN kernel length");
  train_cmd->add_option("--out-dir", train_outdir, "Checkpoint directory");

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint over a noise/eta2 grid");
  std::string eval_ckpt, eval_noises = "pink", eval_eta2 = "inf,0.5,0.1", eval_error_dir;
  double eval_seconds = 10.0;
  std::uint64_t eval_seed = 99;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Controller checkpoint")->required();
  eval_cmd->add_option("--noises", eval_noises, "Comma list of noise kinds or wav:<path>");
  eval_cmd->add_option("--eta2", eval_eta2, "Comma list of eta^2 values");
  eval_cmd->add_option("--seconds", eval_seconds, "Test duration (s)");
  eval_cmd->add_option("--seed", eval_seed, "Noise seed");
  eval_cmd->add_option("--error-dir", eval_error_dir, "Export error signals as WAV here");

  // --- spectrogram ---
  auto* spec_cmd = app.add_subcommand("spectrogram", "Export before/after spectrogram CSVs");
  std::string spec_noise = "pink", spec_eta2 = "0.5", spec_ckpt, spec_weights, spec_outdir = ".",
              spec_prefix = "cell";
  double spec_seconds = 10.0;
  std::size_t spec_frame = 512, spec_hop = 256;
  std::uint64_t spec_seed = 99;
  spec_cmd->add_option("--noise", spec_noise, "Noise kind or wav:<path>");
  spec_cmd->add_option("--eta2", spec_eta2, "Loudspeaker eta^2");
  spec_cmd->add_option("--checkpoint", spec_ckpt, "Controller checkpoint (ANC on = model)");
  spec_cmd->add_option("--weights", spec_weights, "Control filter CSV (ANC on = fixed filter)");
  spec_cmd->add_option("--seconds", spec_seconds, "Duration (s)");
  spec_cmd->add_option("--seed", spec_seed, "Noise seed");
  spec_cmd->add_option("--frame", spec_frame, "STFT frame (power of two)");
  spec_cmd->add_option("--hop", spec_hop, "STFT hop");
  spec_cmd->add_option("--out-dir", spec_outdir, "Output directory");
  spec_cmd->add_option("--prefix", spec_prefix, "Output file prefix");

  CLI11_PARSE(app, argc, argv);

  if (rir_cmd->parsed()) {
    anc::RoomSpec room;
    room.dimensions = parse_triple_arg(rir_dims, "--dims");
    room.source_position = parse_triple_arg(rir_src, "--src");
    room.mic_position = parse_triple_arg(rir_mic, "--mic");
    room.t60 = rir_t60;
    room.sample_rate = rir_fs;
    room.rir_length = rir_len;
    const anc::FIRCoeffs rir = anc::simulate_rir(room, rir_free_field ? 0 : -1);
    if (rir_out.size() > 4 && rir_out.substr(rir_out.size() - 4) == ".wav")
      anc::write_wav(anc::Signal(rir.taps, rir_fs), rir_out, anc::WavEncoding::Float32);
    else
      anc::write_fir_csv(rir, rir_out);
    std::printf("wrote %zu-tap RIR to %s\n", rir.size(), rir_out.c_str());
    return 0;
  }

  if (run_cmd->parsed()) {
    anc::ExperimentConfig cfg = anc::load_experiment_config(run_config);
    if (!run_outdir.empty()) cfg.output_dir = run_outdir;
    std::filesystem::create_directories(cfg.output_dir);
    const anc::ResultsTable table = anc::run_experiment(cfg);
    const anc::EmittedFiles files = anc::emit_results(table, cfg.output_dir);
    std::printf("wrote %s and %s (%zu cells)\n", files.csv_path.c_str(), files.text_path.c_str(),
                table.rows.size());
    for (const auto& row : table.rows)
      if (row.status != "ok")
        std::fprintf(stderr, "cell %s/%s/%s: %s\n", row.metrics.algorithm.c_str(),
                     row.metrics.noise.c_str(), row.metrics.eta2.c_str(), row.status.c_str());
    return 0;
  }

  if (wiener_cmd->parsed()) {
    anc::ExperimentConfig cfg;
    const double eta2 = parse_eta2_arg(wiener_eta2);
    const anc::PlantModel plant = anc::build_plant(cfg.room, cfg.sample_rate, eta2);
    const anc::Signal x = cli_noise(wiener_noise, wiener_seconds, wiener_seed, cfg.sample_rate);
    const anc::FIRCoeffs w = anc::wiener_design(x, plant, wiener_taps);
    const anc::Signal y = anc::fast_convolve(x, w);
    const anc::Signal d = anc::direct_convolve(x, plant.primary);
    const anc::Signal e = anc::plant_error(x, y, plant);
    std::printf("wiener(%zu) on %s, eta2=%s: NMSE %.2f dB, dBA %.2f\n", wiener_taps,
                wiener_noise.c_str(), wiener_eta2.c_str(), anc::nmse_db(e, d),
                anc::dba_delta_db(e, d));
    if (!wiener_out.empty()) anc::write_fir_csv(w, wiener_out);
    return 0;
  }

  if (train_cmd->parsed()) {
    anc::ExperimentConfig cfg;
    const double eta2 = parse_eta2_arg(train_eta2);
    const anc::PlantModel plant = anc::build_plant(cfg.room, cfg.sample_rate, eta2);

    anc::SegmentSet dataset;
    dataset.seed = train_seed;
    std::stringstream ss(train_noises);
    std::string label;
    while (std::getline(ss, label, ',')) {
      const anc::Signal noise = cli_noise(label, train_seconds, train_seed, cfg.sample_rate);
      anc::SegmentSet part = anc::segment_normalize(noise, 3.0);
      for (std::size_t i = 0; i < part.segments.size(); ++i) {
        dataset.segments.push_back(std::move(part.segments[i]));
        dataset.labels.push_back(label + ":" + part.labels[i]);
      }
    }

    anc::WaveNetVnnConfig arch;
    arch.stacks = t_stacks;
    arch.layers_per_stack = t_layers;
    arch.residual_channels = t_channels;
    arch.skip_channels = t_skip;
    arch.vnn_kernel_len = t_vnn_len;

    std::filesystem::create_directories(train_outdir);
    anc::TrainConfig tc;
    tc.epochs = train_epochs;
    tc.learning_rate = train_lr;
    tc.seed = train_seed;
    tc.checkpoint_dir = train_outdir;

    anc::TrainLog log;
    const anc::WaveNetVnnParams params = anc::train_model(
        dataset, plant, anc::init_params(arch, anc::derive_seed(train_seed, "init")), tc, &log);
    anc::save_checkpoint(params, train_outdir + "/final.ckpt");
    for (std::size_t i = 0; i < log.epoch_mean_loss.size(); ++i)
      std::printf("epoch %zu: mean loss %.3f\n", i + 1, log.epoch_mean_loss[i]);
    std::printf("wrote %s/final.ckpt (%zu segments, rf=%zu)\n", train_outdir.c_str(),
                dataset.segments.size(), arch.receptive_field());
    return 0;
  }

  if (eval_cmd->parsed()) {
    anc::ExperimentConfig cfg;
    const anc::WaveNetVnnParams params = anc::load_checkpoint(eval_ckpt);
    std::stringstream ss(eval_noises);
    std::string label;
    while (std::getline(ss, label, ',')) {
      const anc::Signal x = cli_noise(label, eval_seconds, eval_seed, cfg.sample_rate);
      std::stringstream es(eval_eta2);
      std::string ev;
      while (std::getline(es, ev, ',')) {
        const double eta2 = parse_eta2_arg(ev);
        const anc::PlantModel plant = anc::build_plant(cfg.room, cfg.sample_rate, eta2);
        const anc::Signal y = anc::model_forward(x, params);
        const anc::Signal d = anc::direct_convolve(x, plant.primary);
        const anc::Signal e = anc::plant_error(x, y, plant);
        std::printf("%s eta2=%s: NMSE %.2f dB, dBA %.2f\n", label.c_str(), ev.c_str(),
                    anc::nmse_db(e, d), anc::dba_delta_db(e, d));
        if (!eval_error_dir.empty()) {
          std::filesystem::create_directories(eval_error_dir);
          anc::write_wav(e, eval_error_dir + "/" + label + "_" + ev + "_error.wav",
                         anc::WavEncoding::Float32);
        }
      }
    }
    return 0;
  }

  if (spec_cmd->parsed()) {
    anc::ExperimentConfig cfg;
    const double eta2 = parse_eta2_arg(spec_eta2);
    const anc::PlantModel plant = anc::build_plant(cfg.room, cfg.sample_rate, eta2);
    const anc::Signal x = cli_noise(spec_noise, spec_seconds, spec_seed, cfg.sample_rate);
    const anc::Signal d = anc::direct_convolve(x, plant.primary);
    anc::Signal y(std::vector<double>(x.size(), 0.0), x.sample_rate);
    if (!spec_ckpt.empty())
      y = anc::model_forward(x, anc::load_checkpoint(spec_ckpt));
    else if (!spec_weights.empty())
      y = anc::fast_convolve(x, anc::read_fir_csv(spec_weights));
    const anc::Signal e = anc::plant_error(x, y, plant);
    std::filesystem::create_directories(spec_outdir);
    anc::export_cell_spectrograms(d, e, spec_frame, spec_hop, spec_outdir, spec_prefix);
    std::printf("wrote %s/%s_anc_off.csv and %s_anc_on.csv (NMSE %.2f dB)\n", spec_outdir.c_str(),
                spec_prefix.c_str(), spec_prefix.c_str(), anc::nmse_db(e, d));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const anc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const anc::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 2;
  } catch (const anc::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
