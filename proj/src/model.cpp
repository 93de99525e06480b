#include "l3/model.hpp"

#include <cmath>
#include <stdexcept>

namespace l3::model {

namespace {

std::string block_name(const std::string& prefix, const char* kind, int b, int i) {
  return prefix + "." + kind + std::to_string(b + 1) + "_" + std::to_string(i + 1);
}

void accum(Tensor& param, const Tensor& g) {
  auto& grad = param.grad();
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

Tensor glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const float limit = std::sqrt(6.f / static_cast<float>(fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

void init_conv_bn(ParamSet& p, const std::string& prefix, int b, int i, int in_ch,
                  int out_ch, std::uint64_t seed) {
  const std::string conv = block_name(prefix, "conv", b, i);
  Rng rng = derive_rng(seed, fnv1a64(conv));
  p.add(conv + ".weight", glorot_uniform({out_ch, in_ch, 3, 3}, in_ch * 9, out_ch * 9, rng));
  p.add(conv + ".bias", Tensor({out_ch}));
  const std::string bn = block_name(prefix, "bn", b, i);
  p.add(bn + ".gamma", Tensor({out_ch}, 1.f));
  p.add(bn + ".beta", Tensor({out_ch}));
  p.add(bn + ".running_mean", Tensor({out_ch}));
  p.add(bn + ".running_var", Tensor({out_ch}, 1.f));
}

void init_mlp(ParamSet& p, const std::string& prefix, int d_in, int hidden, int d_out,
              std::uint64_t seed) {
  Rng r1 = derive_rng(seed, fnv1a64(prefix + ".fc1"));
  p.add(prefix + ".fc1.weight", glorot_uniform({d_in, hidden}, d_in, hidden, r1));
  p.add(prefix + ".fc1.bias", Tensor({hidden}));
  Rng r2 = derive_rng(seed, fnv1a64(prefix + ".fc2"));
  p.add(prefix + ".fc2.weight", glorot_uniform({hidden, d_out}, hidden, d_out, r2));
  p.add(prefix + ".fc2.bias", Tensor({d_out}));
}

}  // namespace

L3Config L3Config::paper() { return L3Config{}; }

L3Config L3Config::tiny() {
  L3Config c = with_multiplier(0.25f);
  c.vision_h = 64;
  c.vision_w = 64;
  c.spec_bands = 65;   // 8 kHz, 0.016 s windows, 128-point FFT
  c.spec_frames = 62;  // hop = full window
  return c;
}

L3Config L3Config::with_multiplier(float m) {
  if (m <= 0.f || m > 1.f)
    throw std::invalid_argument("width multiplier must be in (0, 1]");
  L3Config c;
  c.width_multiplier = m;
  for (auto& ch : c.block_channels)
    ch = std::max(1, static_cast<int>(std::lround(ch * m)));
  c.fusion_hidden = std::max(1, static_cast<int>(std::lround(c.fusion_hidden * m)));
  return c;
}

void L3Config::validate() const {
  for (int ch : block_channels)
    if (ch < 1) throw std::invalid_argument("block channels must be positive");
  for (int b = 0; b < 3; ++b)
    if (block_channels[b + 1] < block_channels[b])
      throw std::invalid_argument("block channels must be non-decreasing");
  if (fusion_hidden < 1) throw std::invalid_argument("fusion hidden size must be positive");
  if (vision_h < 16 || vision_w < 16 || spec_bands < 16 || spec_frames < 16)
    throw std::invalid_argument("inputs must be at least 16 pixels per side");
}

Tensor& ParamSet::add(const std::string& name, Tensor t) {
  auto [it, inserted] = map_.emplace(name, std::move(t));
  if (!inserted) throw std::invalid_argument("duplicate parameter name: " + name);
  order_.push_back(name);
  return it->second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = map_.find(name);
  if (it == map_.end()) throw std::out_of_range("no parameter named " + name);
  return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw std::out_of_range("no parameter named " + name);
  return it->second;
}

void ParamSet::zero_grads() {
  for (const auto& n : order_) map_.at(n).zero_grad();
}

ParamSet init_params(const L3Config& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamSet p;
  for (const std::string prefix : {"vision", "audio"}) {
    int in_ch = prefix == "vision" ? 3 : 1;
    for (int b = 0; b < 4; ++b) {
      for (int i = 0; i < 2; ++i) {
        init_conv_bn(p, prefix, b, i, in_ch, cfg.block_channels[b], seed);
        in_ch = cfg.block_channels[b];
      }
    }
  }
  init_mlp(p, "fusion", cfg.fusion_input(), cfg.fusion_hidden, 2, seed);
  return p;
}

void add_classifier_head(ParamSet& params, const L3Config& cfg, const std::string& modality,
                         int num_classes, std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("classifier needs at least 2 classes");
  init_mlp(params, modality + "_head", cfg.embed_dim(), 128, num_classes, seed);
}

TrunkOut trunk_forward(ParamSet& params, const std::string& prefix, const L3Config& cfg,
                       const Tensor& input, nn::Mode mode, TrunkTape* tape) {
  if (input.ndim() != 4) throw std::invalid_argument("trunk input must be N×C×H×W");
  if (input.dim(2) < 16 || input.dim(3) < 16)
    throw std::invalid_argument("trunk input too small: " + Tensor::shape_str(input.shape()));

  TrunkTape local;
  TrunkTape& t = tape ? *tape : local;
  t.mode = mode;
  t.input = input;

  const Tensor* x = &t.input;
  for (int b = 0; b < 4; ++b) {
    for (int i = 0; i < 2; ++i) {
      const int l = 2 * b + i;
      LayerTape& lt = t.layer[l];
      const std::string conv = block_name(prefix, "conv", b, i);
      const std::string bn = block_name(prefix, "bn", b, i);
      lt.conv_out = nn::conv2d_forward(*x, params.at(conv + ".weight"), params.at(conv + ".bias"));
      lt.bn_out = nn::batchnorm_forward(lt.conv_out, params.at(bn + ".gamma"),
                                        params.at(bn + ".beta"), mode,
                                        params.at(bn + ".running_mean"),
                                        params.at(bn + ".running_var"), &lt.bn);
      lt.relu_out = nn::relu_forward(lt.bn_out);
      x = &lt.relu_out;
    }
    t.pool[b] = nn::maxpool2d_forward(*x, 2);
    x = &t.pool[b].output;
  }

  TrunkOut out;
  out.conv42_post = t.pool[3].output;
  out.conv42_pre = nn::maxpool2d_forward(t.layer[7].bn_out, 2).output;
  t.global = nn::global_maxpool_forward(out.conv42_post);
  out.embedding = t.global.output;
  return out;
}

void trunk_backward(ParamSet& params, const std::string& prefix, const TrunkTape& tape,
                    const Tensor& d_embedding) {
  if (tape.mode != nn::Mode::kTrain)
    throw std::logic_error("trunk_backward requires a train-mode tape");

  Tensor d = nn::maxpool_backward(tape.global.argmax, d_embedding,
                                  tape.pool[3].output.shape());
  d = nn::maxpool_backward(tape.pool[3].argmax, d, tape.layer[7].relu_out.shape());
  for (int b = 3; b >= 0; --b) {
    for (int i = 1; i >= 0; --i) {
      const int l = 2 * b + i;
      const LayerTape& lt = tape.layer[l];
      const std::string conv = block_name(prefix, "conv", b, i);
      const std::string bn = block_name(prefix, "bn", b, i);

      d = nn::relu_backward(lt.bn_out, d);
      nn::BatchNormGrads bg =
          nn::batchnorm_backward(lt.conv_out, params.at(bn + ".gamma"), lt.bn, d);
      accum(params.at(bn + ".gamma"), bg.gamma);
      accum(params.at(bn + ".beta"), bg.beta);
      d = std::move(bg.input);

      const Tensor& cin = l == 0 ? tape.input
                                 : (i == 1 ? tape.layer[l - 1].relu_out
                                           : tape.pool[b - 1].output);
      nn::Conv2dGrads cg = nn::conv2d_backward(cin, params.at(conv + ".weight"), d, l != 0);
      accum(params.at(conv + ".weight"), cg.kernel);
      accum(params.at(conv + ".bias"), cg.bias);
      if (l == 0) return;
      d = std::move(cg.input);
    }
    d = nn::maxpool_backward(tape.pool[b - 1].argmax, d, tape.layer[2 * b - 1].relu_out.shape());
  }
}

TrunkOut vision_forward(ParamSet& params, const L3Config& cfg, const Tensor& images,
                        nn::Mode mode, TrunkTape* tape) {
  if (images.ndim() != 4 || images.dim(1) != 3)
    throw std::invalid_argument("vision input must be N×3×H×W");
  return trunk_forward(params, "vision", cfg, images, mode, tape);
}

TrunkOut audio_forward(ParamSet& params, const L3Config& cfg, const Tensor& spectrograms,
                       nn::Mode mode, TrunkTape* tape) {
  if (spectrograms.ndim() != 4 || spectrograms.dim(1) != 1)
    throw std::invalid_argument("audio input must be N×1×F×T");
  if (spectrograms.dim(2) != cfg.spec_bands || spectrograms.dim(3) != cfg.spec_frames)
    throw std::invalid_argument(
        "audio input " + Tensor::shape_str(spectrograms.shape()) +
        " does not match configured spectrogram size " + std::to_string(cfg.spec_bands) +
        "x" + std::to_string(cfg.spec_frames));
  return trunk_forward(params, "audio", cfg, spectrograms, mode, tape);
}

Tensor mlp_forward(ParamSet& params, const std::string& prefix, const Tensor& input,
                   MlpTape* tape) {
  MlpTape local;
  MlpTape& t = tape ? *tape : local;
  t.input = input;
  t.fc1_out = nn::fully_connected_forward(input, params.at(prefix + ".fc1.weight"),
                                          params.at(prefix + ".fc1.bias"));
  t.relu_out = nn::relu_forward(t.fc1_out);
  return nn::fully_connected_forward(t.relu_out, params.at(prefix + ".fc2.weight"),
                                     params.at(prefix + ".fc2.bias"));
}

Tensor mlp_backward(ParamSet& params, const std::string& prefix, const MlpTape& tape,
                    const Tensor& d_output) {
  nn::FullyConnectedGrads g2 =
      nn::fully_connected_backward(tape.relu_out, params.at(prefix + ".fc2.weight"), d_output);
  accum(params.at(prefix + ".fc2.weight"), g2.weights);
  accum(params.at(prefix + ".fc2.bias"), g2.bias);
  Tensor d = nn::relu_backward(tape.fc1_out, g2.input);
  nn::FullyConnectedGrads g1 =
      nn::fully_connected_backward(tape.input, params.at(prefix + ".fc1.weight"), d);
  accum(params.at(prefix + ".fc1.weight"), g1.weights);
  accum(params.at(prefix + ".fc1.bias"), g1.bias);
  return std::move(g1.input);
}

Tensor avc_forward(ParamSet& params, const L3Config& cfg, const Tensor& images,
                   const Tensor& spectrograms, nn::Mode mode, AvcTape* tape,
                   TrunkOut* vision_out, TrunkOut* audio_out) {
  if (images.dim(0) != spectrograms.dim(0))
    throw std::invalid_argument("avc_forward: image batch " + std::to_string(images.dim(0)) +
                                " does not match audio batch " +
                                std::to_string(spectrograms.dim(0)));
  AvcTape local;
  AvcTape& t = tape ? *tape : local;
  TrunkOut v = vision_forward(params, cfg, images, mode, &t.vision);
  TrunkOut a = audio_forward(params, cfg, spectrograms, mode, &t.audio);

  const int N = images.dim(0), C = cfg.embed_dim();
  Tensor concat({N, 2 * C});
  for (int n = 0; n < N; ++n) {
    const std::size_t dst = static_cast<std::size_t>(n) * 2 * C;
    for (int c = 0; c < C; ++c) {
      concat[dst + c] = v.embedding[static_cast<std::size_t>(n) * C + c];
      concat[dst + C + c] = a.embedding[static_cast<std::size_t>(n) * C + c];
    }
  }
  if (vision_out) *vision_out = std::move(v);
  if (audio_out) *audio_out = std::move(a);
  return mlp_forward(params, "fusion", concat, &t.fusion);
}

void avc_backward(ParamSet& params, const L3Config& cfg, const AvcTape& tape,
                  const Tensor& d_logits, bool freeze_trunks) {
  Tensor d_concat = mlp_backward(params, "fusion", tape.fusion, d_logits);
  if (freeze_trunks) return;

  const int N = d_concat.dim(0), C = cfg.embed_dim();
  Tensor dv({N, C}), da({N, C});
  for (int n = 0; n < N; ++n) {
    const std::size_t src = static_cast<std::size_t>(n) * 2 * C;
    for (int c = 0; c < C; ++c) {
      dv[static_cast<std::size_t>(n) * C + c] = d_concat[src + c];
      da[static_cast<std::size_t>(n) * C + c] = d_concat[src + C + c];
    }
  }
  trunk_backward(params, "vision", tape.vision, dv);
  trunk_backward(params, "audio", tape.audio, da);
}

}  // namespace l3::model
