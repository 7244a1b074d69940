#include "anc/wavenet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "anc/dsp.hpp"
#include "anc/rng.hpp"

namespace anc {

namespace {
constexpr double kLossDelta = 1e-12;
constexpr double kLog10Scale = 4.342944819032518;  // 10 / ln(10)

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

std::size_t WaveNetVnnConfig::receptive_field() const {
  std::size_t span = 0;
  for (std::size_t l = 0; l < layers(); ++l) span += (kernel_size - 1) * dilation(l);
  return 1 + span + (vnn_kernel_len - 1);
}

void WaveNetVnnConfig::validate() const {
  if (stacks == 0 || layers_per_stack == 0 || kernel_size == 0 || residual_channels == 0 ||
      skip_channels == 0 || vnn_kernel_len == 0 || vnn_pairs == 0)
    throw ConfigError("WaveNetVnnConfig: all geometry fields must be positive");
}

WaveNetVnnConfig WaveNetVnnConfig::tiny() {
  WaveNetVnnConfig c;
  c.stacks = 2;
  c.layers_per_stack = 3;
  c.kernel_size = 2;
  c.residual_channels = 2;
  c.skip_channels = 2;
  c.vnn_kernel_len = 3;
  c.vnn_pairs = 4;
  return c;
}

namespace {

struct Layout {
  struct LayerOffsets {
    std::size_t fw, fb, gw, gb, rw, rb, sw, sb;
  };
  std::size_t input_w = 0, input_b = 0;
  std::vector<LayerOffsets> layers;
  std::size_t post_w[WaveNetVnnConfig::kPostConvs] = {};
  std::size_t post_b[WaveNetVnnConfig::kPostConvs] = {};
  std::size_t vnn_first_w = 0, vnn_first_b = 0;
  std::vector<std::pair<std::size_t, std::size_t>> vnn_pairs;  // (a, b) offsets
  std::size_t total = 0;
};

Layout build_layout(const WaveNetVnnConfig& c, std::vector<TensorInfo>* manifest) {
  Layout lay;
  std::size_t off = 0;
  auto add = [&](const std::string& name, std::vector<std::size_t> shape) {
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    if (manifest) manifest->push_back({name, shape, off, count});
    const std::size_t at = off;
    off += count;
    return at;
  };

  const std::size_t C = c.residual_channels;
  const std::size_t S = c.skip_channels;
  lay.input_w = add("input_w", {C, 1, 1});
  lay.input_b = add("input_b", {C});
  lay.layers.resize(c.layers());
  for (std::size_t l = 0; l < c.layers(); ++l) {
    const std::string p = "layer" + std::to_string(l) + "_";
    auto& lo = lay.layers[l];
    lo.fw = add(p + "filter_w", {C, C, c.kernel_size});
    lo.fb = add(p + "filter_b", {C});
    lo.gw = add(p + "gate_w", {C, C, c.kernel_size});
    lo.gb = add(p + "gate_b", {C});
    lo.rw = add(p + "res_w", {C, C, 1});
    lo.rb = add(p + "res_b", {C});
    lo.sw = add(p + "skip_w", {S, C, 1});
    lo.sb = add(p + "skip_b", {S});
  }
  for (std::size_t i = 0; i < WaveNetVnnConfig::kPostConvs; ++i) {
    const std::string p = "post" + std::to_string(i) + "_";
    lay.post_w[i] = add(p + "w", {S, S, 1});
    lay.post_b[i] = add(p + "b", {S});
  }
  lay.vnn_first_w = add("vnn_first_w", {1, S, c.vnn_kernel_len});
  lay.vnn_first_b = add("vnn_first_b", {1});
  lay.vnn_pairs.resize(c.vnn_pairs);
  for (std::size_t q = 0; q < c.vnn_pairs; ++q) {
    const std::string p = "vnn_pair" + std::to_string(q) + "_";
    lay.vnn_pairs[q].first = add(p + "a", {1, S, c.vnn_kernel_len});
    lay.vnn_pairs[q].second = add(p + "b", {1, S, c.vnn_kernel_len});
  }
  lay.total = off;
  return lay;
}

}  // namespace

const TensorInfo& WaveNetVnnParams::find(const std::string& name) const {
  for (const auto& t : manifest)
    if (t.name == name) return t;
  throw ConfigError("WaveNetVnnParams: no tensor named " + name);
}

double* WaveNetVnnParams::tensor(const std::string& name) { return values.data() + find(name).offset; }
const double* WaveNetVnnParams::tensor(const std::string& name) const {
  return values.data() + find(name).offset;
}

WaveNetVnnParams zero_params(const WaveNetVnnConfig& config) {
  config.validate();
  WaveNetVnnParams p;
  p.config = config;
  Layout lay = build_layout(config, &p.manifest);
  p.values.assign(lay.total, 0.0);
  return p;
}

WaveNetVnnParams init_params(const WaveNetVnnConfig& config, std::uint64_t seed) {
  WaveNetVnnParams p = zero_params(config);
  Rng rng(seed);
  auto fill = [&](const std::string& name, std::size_t fan_in) {
    const TensorInfo& t = p.find(name);
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.count; ++i) p.values[t.offset + i] = rng.uniform(-a, a);
  };
  const std::size_t C = config.residual_channels;
  fill("input_w", 1);
  for (std::size_t l = 0; l < config.layers(); ++l) {
    const std::string pre = "layer" + std::to_string(l) + "_";
    fill(pre + "filter_w", C * config.kernel_size);
    fill(pre + "gate_w", C * config.kernel_size);
    fill(pre + "res_w", C);
    fill(pre + "skip_w", C);
  }
  for (std::size_t i = 0; i < WaveNetVnnConfig::kPostConvs; ++i)
    fill("post" + std::to_string(i) + "_w", config.skip_channels);
  // Output stage: first-order kernel and the b side of each quadratic pair
  // stay zero, so the initial control signal is exactly zero while both
  // sides of the pairs still receive gradient.
  for (std::size_t q = 0; q < config.vnn_pairs; ++q)
    fill("vnn_pair" + std::to_string(q) + "_a", config.skip_channels * config.vnn_kernel_len);
  return p;
}

void causal_dilated_conv(const std::vector<double>& x, std::size_t in_ch, std::size_t length,
                         const double* kernel, const double* bias, std::size_t out_ch,
                         std::size_t taps, std::size_t dilation, std::vector<double>& out) {
  if (dilation < 1) throw ConfigError("causal_dilated_conv: dilation must be >= 1");
  if (taps == 0) throw ShapeError("causal_dilated_conv: empty kernel");
  if (x.size() != in_ch * length) throw ShapeError("causal_dilated_conv: input shape mismatch");
  out.assign(out_ch * length, 0.0);
  for (std::size_t o = 0; o < out_ch; ++o) {
    double* dst = out.data() + o * length;
    if (bias) {
      const double b = bias[o];
      for (std::size_t t = 0; t < length; ++t) dst[t] = b;
    }
    for (std::size_t i = 0; i < in_ch; ++i) {
      const double* src = x.data() + i * length;
      for (std::size_t k = 0; k < taps; ++k) {
        const double w = kernel[(o * in_ch + i) * taps + k];
        if (w == 0.0) continue;
        const std::size_t shift = k * dilation;
        if (shift >= length) continue;
        for (std::size_t t = shift; t < length; ++t) dst[t] += w * src[t - shift];
      }
    }
  }
}

namespace {

// Adjoint of causal_dilated_conv with respect to its input:
// dx[i][t] += sum_{o,k} kernel[o][i][k] * dout[o][t + k*dilation].
void causal_dilated_conv_adjoint_input(const std::vector<double>& dout, std::size_t out_ch,
                                       std::size_t length, const double* kernel, std::size_t in_ch,
                                       std::size_t taps, std::size_t dilation,
                                       std::vector<double>& dx) {
  for (std::size_t i = 0; i < in_ch; ++i) {
    double* dst = dx.data() + i * length;
    for (std::size_t o = 0; o < out_ch; ++o) {
      const double* src = dout.data() + o * length;
      for (std::size_t k = 0; k < taps; ++k) {
        const double w = kernel[(o * in_ch + i) * taps + k];
        if (w == 0.0) continue;
        const std::size_t shift = k * dilation;
        if (shift >= length) continue;
        for (std::size_t t = 0; t + shift < length; ++t) dst[t] += w * src[t + shift];
      }
    }
  }
}

// Kernel/bias gradients for causal_dilated_conv.
void causal_dilated_conv_grad_params(const std::vector<double>& dout, std::size_t out_ch,
                                     const std::vector<double>& x, std::size_t in_ch,
                                     std::size_t length, std::size_t taps, std::size_t dilation,
                                     double* gkernel, double* gbias) {
  for (std::size_t o = 0; o < out_ch; ++o) {
    const double* g = dout.data() + o * length;
    if (gbias) {
      double acc = 0.0;
      for (std::size_t t = 0; t < length; ++t) acc += g[t];
      gbias[o] += acc;
    }
    for (std::size_t i = 0; i < in_ch; ++i) {
      const double* src = x.data() + i * length;
      for (std::size_t k = 0; k < taps; ++k) {
        const std::size_t shift = k * dilation;
        if (shift >= length) continue;
        double acc = 0.0;
        for (std::size_t t = shift; t < length; ++t) acc += g[t] * src[t - shift];
        gkernel[(o * in_ch + i) * taps + k] += acc;
      }
    }
  }
}

struct Tape {
  std::size_t length = 0;
  std::vector<double> x;
  std::vector<std::vector<double>> res;  // layers+1 streams, [C][T]
  std::vector<std::vector<double>> zf, zg;
  std::vector<double> skip;                       // pre-tanh skip sum [S][T]
  std::vector<double> act[4];                     // tanh outputs in the post stack
  std::vector<std::vector<double>> quad_a, quad_b;  // per pair [T]
  std::vector<double> y;
};

void check_finite(const std::vector<double>& v, const std::string& where) {
  for (double q : v)
    if (!std::isfinite(q))
      throw NumericalError("model_forward: non-finite activation in " + where);
}

std::vector<double> forward_impl(const std::vector<double>& x_in, const WaveNetVnnParams& params,
                                 Tape* tape) {
  const WaveNetVnnConfig& c = params.config;
  c.validate();
  const std::size_t t_len = x_in.size();
  const std::size_t C = c.residual_channels;
  const std::size_t S = c.skip_channels;
  const double* v = params.values.data();
  Layout lay = build_layout(c, nullptr);

  // input projection (1x1, single input channel)
  std::vector<double> res(C * t_len);
  for (std::size_t o = 0; o < C; ++o) {
    const double w = v[lay.input_w + o];
    const double b = v[lay.input_b + o];
    double* dst = res.data() + o * t_len;
    for (std::size_t t = 0; t < t_len; ++t) dst[t] = w * x_in[t] + b;
  }

  if (tape) {
    tape->length = t_len;
    tape->x = x_in;
    tape->res.clear();
    tape->zf.assign(c.layers(), {});
    tape->zg.assign(c.layers(), {});
    tape->res.push_back(res);
  }

  std::vector<double> skip(S * t_len, 0.0);
  std::vector<double> fpre, gpre, z(C * t_len), mix;
  for (std::size_t l = 0; l < c.layers(); ++l) {
    const auto& lo = lay.layers[l];
    const std::size_t dil = c.dilation(l);
    causal_dilated_conv(res, C, t_len, v + lo.fw, v + lo.fb, C, c.kernel_size, dil, fpre);
    causal_dilated_conv(res, C, t_len, v + lo.gw, v + lo.gb, C, c.kernel_size, dil, gpre);
    for (std::size_t i = 0; i < C * t_len; ++i) {
      fpre[i] = std::tanh(fpre[i]);
      gpre[i] = sigmoid(gpre[i]);
      z[i] = fpre[i] * gpre[i];
    }
    causal_dilated_conv(z, C, t_len, v + lo.rw, v + lo.rb, C, 1, 1, mix);
    for (std::size_t i = 0; i < C * t_len; ++i) res[i] += mix[i];
    causal_dilated_conv(z, C, t_len, v + lo.sw, v + lo.sb, S, 1, 1, mix);
    for (std::size_t i = 0; i < S * t_len; ++i) skip[i] += mix[i];
    check_finite(res, "residual layer " + std::to_string(l));
    if (tape) {
      tape->zf[l] = fpre;
      tape->zg[l] = gpre;
      tape->res.push_back(res);
    }
  }

  if (tape) tape->skip = skip;

  // post stack: tanh -> conv -> tanh -> conv -> tanh -> conv -> tanh
  std::vector<double> act = skip;
  for (double& q : act) q = std::tanh(q);
  if (tape) tape->act[0] = act;
  for (std::size_t i = 0; i < WaveNetVnnConfig::kPostConvs; ++i) {
    causal_dilated_conv(act, S, t_len, v + lay.post_w[i], v + lay.post_b[i], S, 1, 1, mix);
    for (double& q : mix) q = std::tanh(q);
    act = mix;
    check_finite(act, "post conv " + std::to_string(i));
    if (tape) tape->act[i + 1] = act;
  }

  // VNN block: first-order conv plus rank-1 quadratic units
  std::vector<double> y(t_len);
  {
    std::vector<double> first;
    causal_dilated_conv(act, S, t_len, v + lay.vnn_first_w, v + lay.vnn_first_b, 1,
                        c.vnn_kernel_len, 1, first);
    y = first;
  }
  if (tape) {
    tape->quad_a.assign(c.vnn_pairs, {});
    tape->quad_b.assign(c.vnn_pairs, {});
  }
  std::vector<double> qa, qb;
  for (std::size_t q = 0; q < c.vnn_pairs; ++q) {
    causal_dilated_conv(act, S, t_len, v + lay.vnn_pairs[q].first, nullptr, 1, c.vnn_kernel_len, 1,
                        qa);
    causal_dilated_conv(act, S, t_len, v + lay.vnn_pairs[q].second, nullptr, 1, c.vnn_kernel_len, 1,
                        qb);
    for (std::size_t t = 0; t < t_len; ++t) y[t] += qa[t] * qb[t];
    if (tape) {
      tape->quad_a[q] = qa;
      tape->quad_b[q] = qb;
    }
  }
  check_finite(y, "vnn output");
  if (tape) tape->y = y;
  return y;
}

std::vector<double> backward_impl(const Tape& tape, const WaveNetVnnParams& params,
                                  const std::vector<double>& dy) {
  const WaveNetVnnConfig& c = params.config;
  const std::size_t t_len = tape.length;
  const std::size_t C = c.residual_channels;
  const std::size_t S = c.skip_channels;
  const double* v = params.values.data();
  Layout lay = build_layout(c, nullptr);

  std::vector<double> grad(params.values.size(), 0.0);
  double* g = grad.data();

  const std::vector<double>& u = tape.act[3];
  std::vector<double> du(S * t_len, 0.0);

  // VNN block
  {
    std::vector<double> dy_ch(dy);  // single output channel
    causal_dilated_conv_grad_params(dy_ch, 1, u, S, t_len, c.vnn_kernel_len, 1,
                                    g + lay.vnn_first_w, g + lay.vnn_first_b);
    causal_dilated_conv_adjoint_input(dy_ch, 1, t_len, v + lay.vnn_first_w, S, c.vnn_kernel_len, 1,
                                      du);
    std::vector<double> da(t_len), db(t_len);
    for (std::size_t q = 0; q < c.vnn_pairs; ++q) {
      for (std::size_t t = 0; t < t_len; ++t) {
        da[t] = dy[t] * tape.quad_b[q][t];
        db[t] = dy[t] * tape.quad_a[q][t];
      }
      causal_dilated_conv_grad_params(da, 1, u, S, t_len, c.vnn_kernel_len, 1,
                                      g + lay.vnn_pairs[q].first, nullptr);
      causal_dilated_conv_grad_params(db, 1, u, S, t_len, c.vnn_kernel_len, 1,
                                      g + lay.vnn_pairs[q].second, nullptr);
      causal_dilated_conv_adjoint_input(da, 1, t_len, v + lay.vnn_pairs[q].first, S,
                                        c.vnn_kernel_len, 1, du);
      causal_dilated_conv_adjoint_input(db, 1, t_len, v + lay.vnn_pairs[q].second, S,
                                        c.vnn_kernel_len, 1, du);
    }
  }

  // post stack, reverse
  std::vector<double> dpre(S * t_len), dprev;
  for (std::size_t step = WaveNetVnnConfig::kPostConvs; step-- > 0;) {
    const std::vector<double>& out_act = tape.act[step + 1];
    for (std::size_t i = 0; i < S * t_len; ++i)
      dpre[i] = du[i] * (1.0 - out_act[i] * out_act[i]);
    causal_dilated_conv_grad_params(dpre, S, tape.act[step], S, t_len, 1, 1, g + lay.post_w[step],
                                    g + lay.post_b[step]);
    dprev.assign(S * t_len, 0.0);
    causal_dilated_conv_adjoint_input(dpre, S, t_len, v + lay.post_w[step], S, 1, 1, dprev);
    du = dprev;
  }
  std::vector<double> dskip(S * t_len);
  for (std::size_t i = 0; i < S * t_len; ++i)
    dskip[i] = du[i] * (1.0 - tape.act[0][i] * tape.act[0][i]);

  // residual layers, reverse; the final residual stream is unused downstream
  std::vector<double> dres(C * t_len, 0.0);
  std::vector<double> z(C * t_len), dz(C * t_len), dfpre(C * t_len), dgpre(C * t_len);
  for (std::size_t l = c.layers(); l-- > 0;) {
    const auto& lo = lay.layers[l];
    const std::size_t dil = c.dilation(l);
    const std::vector<double>& zf = tape.zf[l];
    const std::vector<double>& zg = tape.zg[l];
    for (std::size_t i = 0; i < C * t_len; ++i) z[i] = zf[i] * zg[i];

    causal_dilated_conv_grad_params(dres, C, z, C, t_len, 1, 1, g + lo.rw, g + lo.rb);
    causal_dilated_conv_grad_params(dskip, S, z, C, t_len, 1, 1, g + lo.sw, g + lo.sb);
    std::fill(dz.begin(), dz.end(), 0.0);
    causal_dilated_conv_adjoint_input(dres, C, t_len, v + lo.rw, C, 1, 1, dz);
    causal_dilated_conv_adjoint_input(dskip, S, t_len, v + lo.sw, C, 1, 1, dz);

    for (std::size_t i = 0; i < C * t_len; ++i) {
      const double dzf = dz[i] * zg[i];
      const double dzg = dz[i] * zf[i];
      dfpre[i] = dzf * (1.0 - zf[i] * zf[i]);
      dgpre[i] = dzg * zg[i] * (1.0 - zg[i]);
    }
    const std::vector<double>& layer_in = tape.res[l];
    causal_dilated_conv_grad_params(dfpre, C, layer_in, C, t_len, c.kernel_size, dil, g + lo.fw,
                                    g + lo.fb);
    causal_dilated_conv_grad_params(dgpre, C, layer_in, C, t_len, c.kernel_size, dil, g + lo.gw,
                                    g + lo.gb);
    // residual identity passes dres through; add the conv adjoints
    causal_dilated_conv_adjoint_input(dfpre, C, t_len, v + lo.fw, C, c.kernel_size, dil, dres);
    causal_dilated_conv_adjoint_input(dgpre, C, t_len, v + lo.gw, C, c.kernel_size, dil, dres);
  }

  // input projection
  for (std::size_t o = 0; o < C; ++o) {
    const double* dr = dres.data() + o * t_len;
    double gw = 0.0, gb = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      gw += dr[t] * tape.x[t];
      gb += dr[t];
    }
    g[lay.input_w + o] += gw;
    g[lay.input_b + o] += gb;
  }
  return grad;
}

}  // namespace

GatedBlockOut gated_residual_block(const std::vector<double>& x, std::size_t length,
                                   const WaveNetVnnParams& params, std::size_t layer) {
  const WaveNetVnnConfig& c = params.config;
  if (layer >= c.layers()) throw ConfigError("gated_residual_block: layer index out of range");
  const std::size_t C = c.residual_channels;
  if (x.size() != C * length) throw ShapeError("gated_residual_block: input width mismatch");
  Layout lay = build_layout(c, nullptr);
  const auto& lo = lay.layers[layer];
  const double* v = params.values.data();
  const std::size_t dil = c.dilation(layer);

  std::vector<double> fpre, gpre, mix;
  causal_dilated_conv(x, C, length, v + lo.fw, v + lo.fb, C, c.kernel_size, dil, fpre);
  causal_dilated_conv(x, C, length, v + lo.gw, v + lo.gb, C, c.kernel_size, dil, gpre);
  std::vector<double> z(C * length);
  for (std::size_t i = 0; i < C * length; ++i) z[i] = std::tanh(fpre[i]) * sigmoid(gpre[i]);

  GatedBlockOut out;
  causal_dilated_conv(z, C, length, v + lo.rw, v + lo.rb, C, 1, 1, mix);
  out.residual = x;
  for (std::size_t i = 0; i < C * length; ++i) out.residual[i] += mix[i];
  causal_dilated_conv(z, C, length, v + lo.sw, v + lo.sb, c.skip_channels, 1, 1, out.skip);
  return out;
}

std::vector<double> vnn_quadratic_unit(const std::vector<double>& x, const std::vector<double>& a_q,
                                       const std::vector<double>& b_q) {
  if (a_q.empty() || b_q.empty()) throw ShapeError("vnn_quadratic_unit: empty kernel");
  if (x.empty()) throw ShapeError("vnn_quadratic_unit: empty input");
  std::vector<double> ca = direct_convolve(x, a_q);
  std::vector<double> cb = direct_convolve(x, b_q);
  for (std::size_t i = 0; i < x.size(); ++i) ca[i] *= cb[i];
  return ca;
}

Signal model_forward(const Signal& x, const WaveNetVnnParams& params) {
  Signal y;
  y.sample_rate = x.sample_rate;
  y.samples = forward_impl(x.samples, params, nullptr);
  return y;
}

double anc_loss(const Signal& e, const Signal& d) {
  if (e.size() != d.size()) throw ShapeError("anc_loss: length mismatch");
  if (e.size() == 0) throw ShapeError("anc_loss: empty signals");
  const FIRCoeffs a = a_weighting_fir(e.sample_rate, 257);
  const double pe = energy(e.samples) + kLossDelta;
  const double pd = energy(d.samples) + kLossDelta;
  const double pae = energy(fast_convolve(e.samples, a.taps)) + kLossDelta;
  const double pad = energy(fast_convolve(d.samples, a.taps)) + kLossDelta;
  return 0.5 * (10.0 * std::log10(pe / pd) + 10.0 * std::log10(pae / pad));
}

namespace {
// out(n) = sum_j h(j) g(n+j): adjoint of causal convolution by h.
std::vector<double> adjoint_correlate(const std::vector<double>& h, const std::vector<double>& gr) {
  const std::size_t n = gr.size();
  const std::size_t k = h.size();
  std::vector<double> padded(gr);
  padded.resize(n + k - 1, 0.0);
  std::vector<double> rev(h.rbegin(), h.rend());
  std::vector<double> full = fast_convolve(padded, rev);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = full[i + k - 1];
  return out;
}
}  // namespace

std::vector<double> anc_loss_grad(const Signal& e, const Signal& d) {
  if (e.size() != d.size()) throw ShapeError("anc_loss_grad: length mismatch");
  const FIRCoeffs a = a_weighting_fir(e.sample_rate, 257);
  const std::vector<double> ae = fast_convolve(e.samples, a.taps);
  const double pe = energy(e.samples) + kLossDelta;
  const double pae = energy(ae) + kLossDelta;
  const std::vector<double> back = adjoint_correlate(a.taps, ae);
  std::vector<double> grad(e.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    grad[i] = kLog10Scale * (e.samples[i] / pe + back[i] / pae);
  return grad;
}

BackwardResult model_backward(const Signal& x, const PlantModel& plant,
                              const WaveNetVnnParams& params) {
  if (plant.primary.size() == 0 || plant.secondary.size() == 0)
    throw ShapeError("model_backward: empty plant path");
  Tape tape;
  BackwardResult result;
  result.control.sample_rate = x.sample_rate;
  result.control.samples = forward_impl(x.samples, params, &tape);

  const std::vector<double> d = fast_convolve(x.samples, plant.primary.taps);
  Signal fy = apply_sef(result.control, plant.eta2);
  std::vector<double> u = fast_convolve(fy.samples, plant.secondary.taps);

  result.error.sample_rate = x.sample_rate;
  result.error.samples = d;
  for (std::size_t i = 0; i < u.size(); ++i) result.error.samples[i] += u[i];

  Signal d_sig(d, x.sample_rate);
  result.loss = anc_loss(result.error, d_sig);
  std::vector<double> de = anc_loss_grad(result.error, d_sig);

  std::vector<double> dfy = adjoint_correlate(plant.secondary.taps, de);
  std::vector<double> dy(dfy.size());
  for (std::size_t i = 0; i < dy.size(); ++i)
    dy[i] = dfy[i] * sef_prime(result.control.samples[i], plant.eta2);

  result.gradients = backward_impl(tape, params, dy);
  for (double gv : result.gradients)
    if (!std::isfinite(gv))
      throw NumericalError("model_backward: non-finite gradient");
  return result;
}

void adam_step(WaveNetVnnParams& params, const std::vector<double>& gradients, TrainState& state) {
  const std::size_t n = params.values.size();
  if (gradients.size() != n) throw ShapeError("adam_step: gradient shape mismatch");
  if (state.adam_first_moment.empty()) {
    state.adam_first_moment.assign(n, 0.0);
    state.adam_second_moment.assign(n, 0.0);
  }
  if (state.adam_first_moment.size() != n || state.adam_second_moment.size() != n)
    throw ShapeError("adam_step: moment shape mismatch");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = gradients[i];
    state.adam_first_moment[i] = state.beta1 * state.adam_first_moment[i] + (1.0 - state.beta1) * gi;
    state.adam_second_moment[i] =
        state.beta2 * state.adam_second_moment[i] + (1.0 - state.beta2) * gi * gi;
    const double mhat = state.adam_first_moment[i] / bc1;
    const double vhat = state.adam_second_moment[i] / bc2;
    params.values[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

WaveNetVnnParams train_model(const SegmentSet& dataset, const PlantModel& plant,
                             WaveNetVnnParams initial, const TrainConfig& config, TrainLog* log) {
  if (dataset.segments.empty()) throw ConfigError("train_model: empty dataset");
  for (const Signal& s : dataset.segments)
    if (s.size() == 0) throw ConfigError("train_model: empty segment");

  WaveNetVnnParams params = std::move(initial);
  TrainState state;
  state.learning_rate = config.learning_rate;

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.segments.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      BackwardResult back = model_backward(dataset.segments[idx], plant, params);
      adam_step(params, back.gradients, state);
      loss_sum += back.loss;
    }
    state.epoch = epoch + 1;
    const double mean = loss_sum / static_cast<double>(order.size());
    if (log) log->epoch_mean_loss.push_back(mean);
    if (!config.checkpoint_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "/epoch_%03zu.ckpt", epoch + 1);
      save_checkpoint(params, config.checkpoint_dir + name);
    }
  }
  return params;
}

namespace {
constexpr char kCheckpointMagic[8] = {'A', 'N', 'C', 'W', 'V', 'N', 'N', '1'};

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& f) {
  T v{};
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw FormatError("load_checkpoint: truncated file");
  return v;
}
}  // namespace

void save_checkpoint(const WaveNetVnnParams& params, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_checkpoint: cannot open " + path);
  f.write(kCheckpointMagic, 8);
  put<std::uint32_t>(f, 1);  // version
  const WaveNetVnnConfig& c = params.config;
  for (std::size_t field : {c.stacks, c.layers_per_stack, c.kernel_size, c.residual_channels,
                            c.skip_channels, c.vnn_kernel_len, c.vnn_pairs})
    put<std::uint32_t>(f, static_cast<std::uint32_t>(field));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(params.manifest.size()));
  for (const TensorInfo& t : params.manifest) {
    put<std::uint16_t>(f, static_cast<std::uint16_t>(t.name.size()));
    f.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint8_t>(f, static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t dim : t.shape) put<std::uint32_t>(f, static_cast<std::uint32_t>(dim));
    put<std::uint64_t>(f, t.offset);
  }
  put<std::uint64_t>(f, params.values.size());
  for (double v : params.values) put<float>(f, static_cast<float>(v));
  if (!f) throw IoError("save_checkpoint: write failed for " + path);
}

WaveNetVnnParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_checkpoint: cannot open " + path);
  char magic[8];
  if (!f.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw FormatError("load_checkpoint: bad magic in " + path);
  const auto version = get<std::uint32_t>(f);
  if (version != 1) throw FormatError("load_checkpoint: unsupported version");

  WaveNetVnnConfig c;
  c.stacks = get<std::uint32_t>(f);
  c.layers_per_stack = get<std::uint32_t>(f);
  c.kernel_size = get<std::uint32_t>(f);
  c.residual_channels = get<std::uint32_t>(f);
  c.skip_channels = get<std::uint32_t>(f);
  c.vnn_kernel_len = get<std::uint32_t>(f);
  c.vnn_pairs = get<std::uint32_t>(f);

  WaveNetVnnParams params = zero_params(c);
  const auto tensor_count = get<std::uint32_t>(f);
  if (tensor_count != params.manifest.size())
    throw FormatError("load_checkpoint: manifest size mismatch");
  for (const TensorInfo& expect : params.manifest) {
    const auto name_len = get<std::uint16_t>(f);
    std::string name(name_len, '\0');
    if (!f.read(name.data(), name_len)) throw FormatError("load_checkpoint: truncated manifest");
    const auto ndim = get<std::uint8_t>(f);
    std::vector<std::size_t> shape(ndim);
    for (auto& dim : shape) dim = get<std::uint32_t>(f);
    const auto offset = get<std::uint64_t>(f);
    if (name != expect.name || shape != expect.shape || offset != expect.offset)
      throw FormatError("load_checkpoint: manifest entry mismatch at " + expect.name);
  }
  const auto total = get<std::uint64_t>(f);
  if (total != params.values.size()) throw FormatError("load_checkpoint: payload size mismatch");
  for (double& v : params.values) v = static_cast<double>(get<float>(f));
  return params;
}

void dump_params_csv(const WaveNetVnnParams& params, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("dump_params_csv: cannot open " + path);
  std::fprintf(f, "name,index,value\n");
  for (const TensorInfo& t : params.manifest)
    for (std::size_t i = 0; i < t.count; ++i)
      std::fprintf(f, "%s,%zu,%.9g\n", t.name.c_str(), i, params.values[t.offset + i]);
  std::fclose(f);
}

}  // namespace anc
