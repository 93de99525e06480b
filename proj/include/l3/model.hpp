#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "l3/nnops.hpp"
#include "l3/rng.hpp"
#include "l3/tensor.hpp"

namespace l3::model {

// Two-stream network: vision and audio trunks of four conv+conv+pool blocks
// (every conv is 3x3 -> batchnorm -> ReLU, pools are 2x2 stride 2), a global
// spatial max producing one embedding per stream, and a fusion head
// concat -> fc -> ReLU -> fc -> 2 logits.
struct L3Config {
  int vision_h = 224, vision_w = 224;
  int spec_bands = 257, spec_frames = 199;
  std::array<int, 4> block_channels = {64, 128, 256, 512};
  int fusion_hidden = 128;
  float width_multiplier = 1.f;

  static L3Config paper();
  // Reduced profile so training-based tests finish in minutes on a CPU.
  static L3Config tiny();
  static L3Config with_multiplier(float m);

  int embed_dim() const { return block_channels[3]; }
  int fusion_input() const { return 2 * embed_dim(); }
  void validate() const;
};

// Named tensors in insertion order. Iteration order is part of the
// checkpoint format, so it must be deterministic.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return map_.count(name) > 0; }
  const std::vector<std::string>& names() const { return order_; }
  std::size_t count() const { return order_.size(); }
  void zero_grads();

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> map_;
};

// Deterministic Glorot-uniform initialization; biases zero, batchnorm
// gamma 1 / beta 0, running stats (0, 1). Vision conv1_1 takes 3 input
// channels, audio conv1_1 takes 1.
ParamSet init_params(const L3Config& cfg, std::uint64_t seed);

// Adds a classification head (embed -> 128 -> ReLU -> num_classes) under
// "<modality>_head." for the supervised baselines.
void add_classifier_head(ParamSet& params, const L3Config& cfg, const std::string& modality,
                         int num_classes, std::uint64_t seed);

struct LayerTape {
  Tensor conv_out;       // pre-batchnorm
  nn::BatchNormCache bn;
  Tensor bn_out;         // pre-ReLU
  Tensor relu_out;
};

struct TrunkTape {
  Tensor input;
  std::array<LayerTape, 8> layer;
  std::array<nn::MaxPool2dOut, 4> pool;
  nn::MaxPool2dOut global;  // over the pooled block-4 map
  nn::Mode mode = nn::Mode::kEval;
};

struct TrunkOut {
  Tensor embedding;    // N x embed_dim
  Tensor conv42_pre;   // pooled block-4 map before the ReLU (N x C x h x w)
  Tensor conv42_post;  // same map after the ReLU; its spatial max is the embedding
};

TrunkOut trunk_forward(ParamSet& params, const std::string& prefix, const L3Config& cfg,
                       const Tensor& input, nn::Mode mode, TrunkTape* tape);
// Accumulates parameter gradients (+=) and returns nothing; the gradient
// w.r.t. the trunk input is never needed.
void trunk_backward(ParamSet& params, const std::string& prefix, const TrunkTape& tape,
                    const Tensor& d_embedding);

TrunkOut vision_forward(ParamSet& params, const L3Config& cfg, const Tensor& images,
                        nn::Mode mode, TrunkTape* tape = nullptr);
TrunkOut audio_forward(ParamSet& params, const L3Config& cfg, const Tensor& spectrograms,
                       nn::Mode mode, TrunkTape* tape = nullptr);

// Two fully connected layers with a ReLU between them; used by the fusion
// network and the supervised classification heads.
struct MlpTape {
  Tensor input, fc1_out, relu_out;
};
Tensor mlp_forward(ParamSet& params, const std::string& prefix, const Tensor& input,
                   MlpTape* tape);
Tensor mlp_backward(ParamSet& params, const std::string& prefix, const MlpTape& tape,
                    const Tensor& d_output);

struct AvcTape {
  TrunkTape vision, audio;
  MlpTape fusion;
};

// correspond/mismatch logits for a batch of (image, spectrogram) pairs.
// Index 1 of the logit row is "correspond".
Tensor avc_forward(ParamSet& params, const L3Config& cfg, const Tensor& images,
                   const Tensor& spectrograms, nn::Mode mode, AvcTape* tape = nullptr,
                   TrunkOut* vision_out = nullptr, TrunkOut* audio_out = nullptr);
void avc_backward(ParamSet& params, const L3Config& cfg, const AvcTape& tape,
                  const Tensor& d_logits, bool freeze_trunks);

inline constexpr int kCorrespondClass = 1;
inline constexpr int kMismatchClass = 0;

}  // namespace l3::model
