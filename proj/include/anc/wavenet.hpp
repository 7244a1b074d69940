#ifndef ANC_WAVENET_HPP
#define ANC_WAVENET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "anc/acoustics.hpp"
#include "anc/data_io.hpp"
#include "anc/types.hpp"

namespace anc {

/// Controller geometry. The default is 3 stacks of 10 dilated layers
/// (dilations 1..512 per stack, kernel size 2); the input projection,
/// residual/skip/post convolutions are pointwise, so the receptive field
/// is set by the dilated stacks (3070 samples) plus any VNN kernel memory.
struct WaveNetVnnConfig {
  std::size_t stacks = 3;
  std::size_t layers_per_stack = 10;
  std::size_t kernel_size = 2;
  std::size_t residual_channels = 16;
  std::size_t skip_channels = 16;
  std::size_t vnn_kernel_len = 1;
  std::size_t vnn_pairs = 4;
  static constexpr std::size_t kPostConvs = 3;  // interleaved with 4 tanh

  std::size_t layers() const { return stacks * layers_per_stack; }
  std::size_t dilation(std::size_t layer) const { return std::size_t{1} << (layer % layers_per_stack); }
  std::size_t receptive_field() const;
  void validate() const;

  /// Small geometry for gradient checks: 2 stacks x 3 layers, 2 channels.
  static WaveNetVnnConfig tiny();
};

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t count = 0;
};

/// All controller weights in one flat buffer with a named-tensor manifest.
struct WaveNetVnnParams {
  WaveNetVnnConfig config;
  std::vector<double> values;
  std::vector<TensorInfo> manifest;

  std::size_t size() const { return values.size(); }
  const TensorInfo& find(const std::string& name) const;
  double* tensor(const std::string& name);
  const double* tensor(const std::string& name) const;
};

/// Zero-valued parameter set (the model then outputs exactly zero).
WaveNetVnnParams zero_params(const WaveNetVnnConfig& config);

/// Fan-in scaled uniform init; the VNN output stage starts at zero so the
/// untrained controller is ANC-off.
WaveNetVnnParams init_params(const WaveNetVnnConfig& config, std::uint64_t seed);

/// out(n) = sum_k kernel(k) x(n - k*dilation), zero left padding. x and out
/// are channel-major [channels][length]. kernel is [out_ch][in_ch][taps].
void causal_dilated_conv(const std::vector<double>& x, std::size_t in_ch, std::size_t length,
                         const double* kernel, const double* bias, std::size_t out_ch,
                         std::size_t taps, std::size_t dilation, std::vector<double>& out);

/// Gated residual block on a [channels][length] sequence; returns the
/// residual stream and accumulates into skip. Exposed for unit tests.
struct GatedBlockOut {
  std::vector<double> residual;
  std::vector<double> skip;
};
GatedBlockOut gated_residual_block(const std::vector<double>& x, std::size_t length,
                                   const WaveNetVnnParams& params, std::size_t layer);

/// (a_q * x)(n) . (b_q * x)(n) on a single-channel sequence; rank-1
/// factorized second-order Volterra term. Exposed for unit tests.
std::vector<double> vnn_quadratic_unit(const std::vector<double>& x, const std::vector<double>& a_q,
                                       const std::vector<double>& b_q);

/// Full controller: reference in, control signal out. Strictly causal.
Signal model_forward(const Signal& x, const WaveNetVnnParams& params);

/// 0.5 * (NMSE_dB + A-weighted NMSE_dB), delta-regularized so it is smooth
/// in e everywhere (including e = 0).
double anc_loss(const Signal& e, const Signal& d);

/// dLoss/de for anc_loss.
std::vector<double> anc_loss_grad(const Signal& e, const Signal& d);

struct BackwardResult {
  double loss = 0.0;
  std::vector<double> gradients;  // same layout as params.values
  Signal control;                 // y = model_forward(x)
  Signal error;                   // e = p*x + s*sef(y)
};

/// Loss and reverse-mode gradients through the fixed plant (secondary path
/// and loudspeaker saturation) and the full network.
BackwardResult model_backward(const Signal& x, const PlantModel& plant,
                              const WaveNetVnnParams& params);

struct TrainState {
  std::vector<double> adam_first_moment;
  std::vector<double> adam_second_moment;
  std::size_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epoch = 0;
};

/// Bias-corrected Adam update in place.
void adam_step(WaveNetVnnParams& params, const std::vector<double>& gradients, TrainState& state);

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::string checkpoint_dir;  // empty -> no checkpoints
};

struct TrainLog {
  std::vector<double> epoch_mean_loss;
};

/// Epochs x shuffled segments of forward / plant / loss / backward / Adam.
/// Deterministic given the seed. Training starts from `initial`.
WaveNetVnnParams train_model(const SegmentSet& dataset, const PlantModel& plant,
                             WaveNetVnnParams initial, const TrainConfig& config,
                             TrainLog* log = nullptr);

/// Flat binary checkpoint: magic, version, geometry, tensor manifest
/// (name, shape, offset), little-endian float32 payload.
void save_checkpoint(const WaveNetVnnParams& params, const std::string& path);
WaveNetVnnParams load_checkpoint(const std::string& path);

/// name,index,value rows for diffing.
void dump_params_csv(const WaveNetVnnParams& params, const std::string& path);

}  // namespace anc

#endif  // ANC_WAVENET_HPP
