#include "anc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "anc/acoustics.hpp"
#include "anc/data_io.hpp"
#include "anc/rng.hpp"
#include "anc/wavenet.hpp"

namespace anc {

namespace {
constexpr const char* kCodeVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& v, const std::string& key) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value '" + v + "' for " + key);
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value '" + v + "' for " + key);
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: bad boolean value '" + v + "' for " + key);
}

std::array<double, 3> parse_triple(const std::string& v, const std::string& key) {
  const auto parts = split_csv(v);
  if (parts.size() != 3) throw ConfigError("config: " + key + " needs three comma-separated values");
  return {parse_double(parts[0], key), parse_double(parts[1], key), parse_double(parts[2], key)};
}
}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open " + path);

  ExperimentConfig cfg;
  cfg.noises.clear();
  cfg.eta2_grid.clear();

  std::string section;
  AlgorithmSpec* alg = nullptr;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: malformed section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      alg = nullptr;
      if (section.rfind("algorithm:", 0) == 0) {
        AlgorithmSpec spec;
        spec.label = trim(section.substr(10));
        if (spec.label.empty())
          throw ConfigError("config: empty algorithm label at line " + std::to_string(lineno));
        cfg.algorithms.push_back(spec);
        alg = &cfg.algorithms.back();
      } else if (section != "experiment" && section != "room" && section != "step_search") {
        throw ConfigError("config: unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "experiment") {
      if (key == "seed") cfg.seed = parse_u64(value, key);
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "sample_rate") cfg.sample_rate = parse_double(value, key);
      else if (key == "test_seconds") cfg.test_seconds = parse_double(value, key);
      else if (key == "noises") cfg.noises = split_csv(value);
      else if (key == "eta2") {
        for (const auto& item : split_csv(value)) cfg.eta2_grid.push_back(parse_double(item, key));
      } else if (key == "reference") {
        if (value != "source" && value != "ref_mic")
          throw ConfigError("config: reference must be source or ref_mic");
        cfg.reference_mode = value;
      } else if (key == "workers") cfg.workers = parse_u64(value, key);
      else if (key == "max_passes") cfg.max_passes = parse_u64(value, key);
      else if (key == "export_error_wav") cfg.export_error_wav = parse_bool(value, key);
      else if (key == "export_weights") cfg.export_weights = parse_bool(value, key);
      else throw ConfigError("config: unknown key '" + key + "' in [experiment]");
    } else if (section == "room") {
      if (key == "dimensions") cfg.room.dimensions = parse_triple(value, key);
      else if (key == "noise_source") cfg.room.noise_source = parse_triple(value, key);
      else if (key == "ref_mic") cfg.room.ref_mic = parse_triple(value, key);
      else if (key == "control_source") cfg.room.control_source = parse_triple(value, key);
      else if (key == "error_mic") cfg.room.error_mic = parse_triple(value, key);
      else if (key == "t60") cfg.room.t60 = parse_double(value, key);
      else if (key == "path_length") cfg.room.path_length = parse_u64(value, key);
      else throw ConfigError("config: unknown key '" + key + "' in [room]");
    } else if (section == "step_search") {
      if (key == "enabled") cfg.step_search.enabled = parse_bool(value, key);
      else if (key == "iterations") cfg.step_search.iterations = parse_u64(value, key);
      else if (key == "bracket_scale") cfg.step_search.bracket_scale = parse_double(value, key);
      else if (key == "passes") cfg.step_search.passes = parse_u64(value, key);
      else throw ConfigError("config: unknown key '" + key + "' in [step_search]");
    } else if (alg != nullptr) {
      if (key == "type") alg->type = value;
      else if (key == "taps") alg->taps = parse_u64(value, key);
      else if (key == "mu") alg->mu = parse_double(value, key);
      else if (key == "forgetting") alg->forgetting = parse_double(value, key);
      else if (key == "update_frames") alg->update_frames = parse_u64(value, key);
      else if (key == "lambda") alg->lambda = parse_double(value, key);
      else if (key == "checkpoint") alg->checkpoint = value;
      else throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    } else {
      throw ConfigError("config: key outside any section at line " + std::to_string(lineno));
    }
  }

  for (const auto& a : cfg.algorithms)
    if (a.type.empty())
      throw ConfigError("config: algorithm '" + a.label + "' is missing a type");
  return cfg;
}

namespace {
std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "seed=" << c.seed << ";out=" << c.output_dir << ";fs=" << c.sample_rate
     << ";sec=" << c.test_seconds << ";ref=" << c.reference_mode << ";passes=" << c.max_passes
     << ";workers=" << c.workers << ";ew=" << c.export_error_wav << ";ww=" << c.export_weights
     << ";noises=";
  for (const auto& n : c.noises) os << n << ",";
  os << ";eta2=";
  for (double e : c.eta2_grid) os << e << ",";
  os << ";room=";
  for (double v : c.room.dimensions) os << v << ",";
  for (double v : c.room.noise_source) os << v << ",";
  for (double v : c.room.ref_mic) os << v << ",";
  for (double v : c.room.control_source) os << v << ",";
  for (double v : c.room.error_mic) os << v << ",";
  os << c.room.t60 << "," << c.room.path_length;
  os << ";search=" << c.step_search.enabled << "," << c.step_search.bracket_scale << ","
     << c.step_search.iterations << "," << c.step_search.passes;
  for (const auto& a : c.algorithms)
    os << ";alg=" << a.label << "," << a.type << "," << a.taps << "," << a.mu << ","
       << a.forgetting << "," << a.update_frames << "," << a.lambda << "," << a.checkpoint;
  return os.str();
}
}  // namespace

std::uint64_t experiment_config_hash(const ExperimentConfig& config) {
  return fnv1a64(serialize_config(config));
}

PlantModel build_plant(const RoomGeometry& room, double sample_rate, double eta2) {
  RoomSpec spec;
  spec.dimensions = room.dimensions;
  spec.t60 = room.t60;
  spec.sample_rate = sample_rate;
  spec.rir_length = room.path_length;

  spec.source_position = room.noise_source;
  spec.mic_position = room.error_mic;
  FIRCoeffs primary = simulate_rir(spec);

  spec.source_position = room.control_source;
  FIRCoeffs secondary = simulate_rir(spec);

  const double peak = peak_abs(primary.taps);
  if (peak <= 0.0) throw NumericalError("build_plant: empty primary path");
  for (double& t : primary.taps) t /= peak;
  for (double& t : secondary.taps) t /= peak;

  PlantModel plant;
  plant.primary = std::move(primary);
  plant.secondary = std::move(secondary);
  plant.eta2 = eta2;
  return plant;
}

Signal make_noise(const ExperimentConfig& config, const std::string& label) {
  Signal x;
  if (label.rfind("wav:", 0) == 0) {
    x = read_wav(label.substr(4));
    x = resample(x, config.sample_rate);
    const double peak = peak_abs(x.samples);
    if (peak <= 0.0) throw DomainError("make_noise: silent wav file " + label);
    for (double& v : x.samples) v /= peak;
  } else {
    x = synth_noise(parse_noise_kind(label), config.test_seconds,
                    derive_seed(config.seed, "noise:" + label), config.sample_rate);
  }
  return x;
}

std::string eta2_label(double eta2) {
  if (std::isinf(eta2)) return "inf";
  std::ostringstream os;
  os << eta2;
  return os.str();
}

namespace {

double tail_nmse_db(const std::vector<double>& e, const std::vector<double>& d) {
  const std::size_t n = std::min(e.size(), d.size());
  if (n == 0) return 0.0;
  const std::size_t tail = std::max<std::size_t>(1, n / 5);
  double pe = 0.0, pd = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) {
    pe += e[i] * e[i];
    pd += d[i] * d[i];
  }
  if (pd <= 0.0) return 0.0;
  if (pe <= 0.0) return kMetricFloorDb;
  return std::max(kMetricFloorDb, 10.0 * std::log10(pe / pd));
}

}  // namespace

ConvergenceResult run_to_convergence(const RunnerFn& runner, const Signal& x,
                                     const PlantModel& plant, double mu, std::size_t max_passes) {
  ConvergenceResult out;
  const std::vector<double> d = fast_convolve(x.samples, plant.primary.taps);
  std::vector<double> w;  // empty -> zeros on the first pass
  double prev = std::numeric_limits<double>::infinity();
  std::size_t total = 0;
  for (std::size_t pass = 1; pass <= max_passes; ++pass) {
    out.report = runner(x, plant, mu, w);
    out.passes = pass;
    total += out.report.error_signal.size();
    if (out.report.diverged) {
      out.diverged = true;
      return out;
    }
    out.steady_nmse_db = tail_nmse_db(out.report.error_signal.samples, d);
    if (std::fabs(out.steady_nmse_db - prev) < 0.1) {
      out.converged_at = total;
      break;
    }
    prev = out.steady_nmse_db;
    w = out.report.final_weights;
  }
  Signal d_sig(d, x.sample_rate);
  out.full_nmse_db = nmse_db(out.report.error_signal, d_sig);
  out.report.converged_at = out.converged_at;
  return out;
}

double golden_section_mu(const std::function<double(double)>& objective_db, double mu_lo,
                         double mu_hi, std::size_t iterations) {
  if (!(mu_lo > 0.0 && mu_hi > mu_lo)) throw ConfigError("golden_section_mu: bad bracket");
  const double phi = 0.618033988749894848;
  double a = std::log(mu_lo), b = std::log(mu_hi);
  double best_x = mu_lo;
  double best_f = std::numeric_limits<double>::infinity();
  auto probe = [&](double logmu) {
    const double mu = std::exp(logmu);
    const double f = objective_db(mu);
    if (f < best_f) {
      best_f = f;
      best_x = mu;
    }
    return f;
  };
  double c = b - phi * (b - a);
  double dpt = a + phi * (b - a);
  double fc = probe(c);
  double fd = probe(dpt);
  for (std::size_t i = 2; i < iterations; ++i) {
    if (fc < fd) {
      b = dpt;
      dpt = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = dpt;
      fc = fd;
      dpt = a + phi * (b - a);
      fd = probe(dpt);
    }
  }
  return best_x;
}

double fxlms_stability_estimate(const Signal& x, const PlantModel& plant, std::size_t taps) {
  const std::vector<double> r = fast_convolve(x.samples, plant.secondary.taps);
  const double p = energy(r) / static_cast<double>(r.size());
  if (p <= 0.0) throw DomainError("fxlms_stability_estimate: zero reference power");
  return 2.0 / (static_cast<double>(taps) * p);
}

namespace {

struct CellJob {
  std::size_t algorithm = 0;
  std::size_t noise = 0;
  std::size_t eta2 = 0;
};

Signal eval_error(const std::vector<double>& d, const PlantModel& plant, const Signal& y) {
  Signal e(d, y.sample_rate);
  const Signal u = direct_convolve(apply_sef(y, plant.eta2), plant.secondary);
  for (std::size_t i = 0; i < e.size(); ++i) e.samples[i] += u.samples[i];
  return e;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '/' || c == ' ' || c == ':') c = '_';
  return out;
}

struct CellContext {
  const ExperimentConfig& config;
  const AlgorithmSpec& spec;
  const Signal& x;                  // reference seen by the controller
  const std::vector<double>& dist;  // disturbance at the error mic
  const PlantModel& plant;
  const std::string& noise_label;
};

ResultRow run_cell(const CellContext& ctx) {
  const ExperimentConfig& config = ctx.config;
  const AlgorithmSpec& spec = ctx.spec;
  ResultRow row;
  row.metrics.algorithm = spec.label;
  row.metrics.noise = ctx.noise_label;
  row.metrics.eta2 = eta2_label(ctx.plant.eta2);
  row.status = "ok";

  const Signal d_sig(ctx.dist, ctx.x.sample_rate);
  try {
    Signal error;
    if (spec.type == "wiener") {
      const FIRCoeffs w =
          wiener_design_explicit(ctx.x, ctx.dist, ctx.plant.secondary, spec.taps);
      const Signal y = fast_convolve(ctx.x, w);
      error = eval_error(ctx.dist, ctx.plant, y);
      if (config.export_weights) {
        write_fir_csv(w, config.output_dir + "/" + sanitize(spec.label) + "_" +
                             sanitize(ctx.noise_label) + "_" + sanitize(row.metrics.eta2) +
                             "_weights.csv");
      }
    } else if (spec.type == "wavenet_vnn") {
      if (spec.checkpoint.empty())
        throw ConfigError("algorithm '" + spec.label + "': wavenet_vnn needs a checkpoint");
      const WaveNetVnnParams params = load_checkpoint(spec.checkpoint);
      const Signal y = model_forward(ctx.x, params);
      error = eval_error(ctx.dist, ctx.plant, y);
    } else {
      const double lambda = spec.lambda > 0.0
                                ? spec.lambda
                                : std::sqrt(ctx.plant.eta2 * 3.14159265358979323846 / 2.0);
      RunnerFn runner;
      if (spec.type == "td_fxlms") {
        runner = [&](const Signal& x, const PlantModel& plant, double mu,
                     const std::vector<double>& w0) {
          RunOptions o;
          o.initial_weights = w0;
          o.disturbance = ctx.dist;
          return td_fxlms_run(x, plant, spec.taps, mu, o);
        };
      } else if (spec.type == "thf_fxlms") {
        runner = [&, lambda](const Signal& x, const PlantModel& plant, double mu,
                             const std::vector<double>& w0) {
          RunOptions o;
          o.initial_weights = w0;
          o.disturbance = ctx.dist;
          return thf_fxlms_run(x, plant, spec.taps, mu, lambda, o);
        };
      } else if (spec.type == "fd_fxnlms") {
        runner = [&](const Signal& x, const PlantModel& plant, double mu,
                     const std::vector<double>& w0) {
          RunOptions o;
          o.initial_weights = w0;
          o.disturbance = ctx.dist;
          return fd_fxnlms_run(x, plant, spec.taps, mu, spec.taps, spec.forgetting, o);
        };
      } else if (spec.type == "fd_felms") {
        runner = [&](const Signal& x, const PlantModel& plant, double mu,
                     const std::vector<double>& w0) {
          RunOptions o;
          o.initial_weights = w0;
          o.disturbance = ctx.dist;
          return fd_felms_whitened_run(x, plant, spec.taps, mu, spec.taps, spec.forgetting,
                                       spec.update_frames, o);
        };
      } else {
        throw ConfigError("algorithm '" + spec.label + "': unknown type " + spec.type);
      }

      double mu = spec.mu;
      if (mu <= 0.0) {
        if (!config.step_search.enabled)
          throw ConfigError("algorithm '" + spec.label + "': mu required when search disabled");
        double hi, lo;
        if (spec.type == "td_fxlms" || spec.type == "thf_fxlms") {
          hi = fxlms_stability_estimate(ctx.x, ctx.plant, spec.taps);
          lo = hi * config.step_search.bracket_scale;
        } else {
          hi = 1.0;
          lo = std::max(1e-6, config.step_search.bracket_scale);
        }
        auto objective = [&](double cand) {
          const ConvergenceResult probe =
              run_to_convergence(runner, ctx.x, ctx.plant, cand, config.step_search.passes);
          return probe.diverged ? 1e9 : probe.steady_nmse_db;
        };
        mu = golden_section_mu(objective, lo, hi, config.step_search.iterations);
      }
      row.mu_used = mu;

      const ConvergenceResult final_run =
          run_to_convergence(runner, ctx.x, ctx.plant, mu, config.max_passes);
      if (final_run.diverged) {
        row.status = "failed: diverged at mu=" + std::to_string(mu);
        row.metrics.nmse_db = std::numeric_limits<double>::quiet_NaN();
        row.metrics.dba_delta_db = std::numeric_limits<double>::quiet_NaN();
        return row;
      }
      row.converged_at = final_run.converged_at;
      error = final_run.report.error_signal;
      if (config.export_weights) {
        write_fir_csv(FIRCoeffs(final_run.report.final_weights),
                      config.output_dir + "/" + sanitize(spec.label) + "_" +
                          sanitize(ctx.noise_label) + "_" + sanitize(row.metrics.eta2) +
                          "_weights.csv");
      }
    }

    row.metrics.nmse_db = nmse_db(error, d_sig);
    row.metrics.dba_delta_db = dba_delta_db(error, d_sig);
    if (config.export_error_wav) {
      write_wav(error,
                config.output_dir + "/" + sanitize(spec.label) + "_" + sanitize(ctx.noise_label) +
                    "_" + sanitize(row.metrics.eta2) + "_error.wav",
                WavEncoding::Float32);
    }
  } catch (const std::exception& ex) {
    row.status = std::string("failed: ") + ex.what();
    row.metrics.nmse_db = std::numeric_limits<double>::quiet_NaN();
    row.metrics.dba_delta_db = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace

ResultsTable run_experiment(const ExperimentConfig& config) {
  if (config.algorithms.empty()) throw ConfigError("run_experiment: no algorithms configured");
  if (config.noises.empty()) throw ConfigError("run_experiment: no noise sources configured");
  if (config.eta2_grid.empty()) throw ConfigError("run_experiment: empty eta2 grid");

  // Shared inputs, built up front: noise signals, plants per eta2, and the
  // reference path when the controller listens at the reference mic.
  std::vector<Signal> sources;
  for (const auto& label : config.noises) sources.push_back(make_noise(config, label));

  std::vector<PlantModel> plants;
  for (double eta2 : config.eta2_grid)
    plants.push_back(build_plant(config.room, config.sample_rate, eta2));

  FIRCoeffs ref_path;
  if (config.reference_mode == "ref_mic") {
    RoomSpec spec;
    spec.dimensions = config.room.dimensions;
    spec.t60 = config.room.t60;
    spec.sample_rate = config.sample_rate;
    spec.rir_length = config.room.path_length;
    spec.source_position = config.room.noise_source;
    spec.mic_position = config.room.ref_mic;
    ref_path = simulate_rir(spec);
    const double peak = peak_abs(ref_path.taps);
    for (double& t : ref_path.taps) t /= peak;
  }

  std::vector<Signal> references;
  std::vector<std::vector<double>> disturbances;  // per (noise, eta2-independent)
  for (const Signal& src : sources) {
    disturbances.push_back(fast_convolve(src.samples, plants[0].primary.taps));
    if (config.reference_mode == "ref_mic")
      references.push_back(fast_convolve(src, ref_path));
    else
      references.push_back(src);
  }

  std::vector<CellJob> jobs;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a)
    for (std::size_t n = 0; n < sources.size(); ++n)
      for (std::size_t e = 0; e < config.eta2_grid.size(); ++e) jobs.push_back({a, n, e});

  std::vector<ResultRow> rows(jobs.size());
  auto work = [&](std::size_t j) {
    const CellJob& job = jobs[j];
    CellContext ctx{config,
                    config.algorithms[job.algorithm],
                    references[job.noise],
                    disturbances[job.noise],
                    plants[job.eta2],
                    config.noises[job.noise]};
    rows[j] = run_cell(ctx);
  };

  if (config.workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t nw = std::min<std::size_t>(config.workers, jobs.size());
    pool.reserve(nw);
    for (std::size_t t = 0; t < nw; ++t)
      pool.emplace_back([&]() {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) work(j);
      });
    for (auto& th : pool) th.join();
  }

  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.metrics.algorithm != b.metrics.algorithm) return a.metrics.algorithm < b.metrics.algorithm;
    if (a.metrics.noise != b.metrics.noise) return a.metrics.noise < b.metrics.noise;
    return a.metrics.eta2 < b.metrics.eta2;
  });

  ResultsTable table;
  table.rows = std::move(rows);
  table.config_hash = experiment_config_hash(config);
  table.code_version = kCodeVersion;
  char stamp[64];
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  table.timestamp = stamp;
  return table;
}

EmittedFiles emit_results(const ResultsTable& table, const std::string& output_dir) {
  if (table.rows.empty()) throw ConfigError("emit_results: empty results table");
  EmittedFiles files;
  files.csv_path = output_dir + "/results.csv";
  files.text_path = output_dir + "/results.txt";

  std::FILE* csv = std::fopen(files.csv_path.c_str(), "w");
  if (!csv) throw IoError("emit_results: cannot open " + files.csv_path);
  std::fprintf(csv, "algorithm,noise,eta2,nmse_db,dba_db,status\n");
  for (const auto& row : table.rows) {
    if (std::isfinite(row.metrics.nmse_db) && std::isfinite(row.metrics.dba_delta_db))
      std::fprintf(csv, "%s,%s,%s,%.2f,%.2f,%s\n", row.metrics.algorithm.c_str(),
                   row.metrics.noise.c_str(), row.metrics.eta2.c_str(), row.metrics.nmse_db,
                   row.metrics.dba_delta_db, row.status.c_str());
    else
      std::fprintf(csv, "%s,%s,%s,,,%s\n", row.metrics.algorithm.c_str(),
                   row.metrics.noise.c_str(), row.metrics.eta2.c_str(), row.status.c_str());
  }
  std::fclose(csv);

  std::FILE* txt = std::fopen(files.text_path.c_str(), "w");
  if (!txt) throw IoError("emit_results: cannot open " + files.text_path);
  std::fprintf(txt, "# ANC benchmark report\n");
  std::fprintf(txt, "# config_hash: %016llx\n",
               static_cast<unsigned long long>(table.config_hash));
  std::fprintf(txt, "# code_version: %s\n", table.code_version.c_str());
  std::fprintf(txt, "# timestamp: %s\n", table.timestamp.c_str());
  std::fprintf(txt, "%-24s %-24s %-8s %9s %9s  %s\n", "algorithm", "noise", "eta2", "dBA", "NMSE",
               "status");
  for (const auto& row : table.rows) {
    if (std::isfinite(row.metrics.nmse_db))
      std::fprintf(txt, "%-24s %-24s %-8s %9.2f %9.2f  %s\n", row.metrics.algorithm.c_str(),
                   row.metrics.noise.c_str(), row.metrics.eta2.c_str(), row.metrics.dba_delta_db,
                   row.metrics.nmse_db, row.status.c_str());
    else
      std::fprintf(txt, "%-24s %-24s %-8s %9s %9s  %s\n", row.metrics.algorithm.c_str(),
                   row.metrics.noise.c_str(), row.metrics.eta2.c_str(), "-", "-",
                   row.status.c_str());
  }
  std::fclose(txt);
  return files;
}

void export_cell_spectrograms(const Signal& d, const Signal& e, std::size_t frame, std::size_t hop,
                              const std::string& output_dir, const std::string& prefix) {
  write_spectrogram_csv(stft_spectrogram(d, frame, hop),
                        output_dir + "/" + prefix + "_anc_off.csv");
  write_spectrogram_csv(stft_spectrogram(e, frame, hop), output_dir + "/" + prefix + "_anc_on.csv");
}

}  // namespace anc
