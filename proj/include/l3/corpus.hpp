#pragma once

#include <string>
#include <vector>

#include "l3/audio.hpp"
#include "l3/rng.hpp"
#include "l3/tensor.hpp"

namespace l3::corpus {

struct Frame {
  double t = 0.0;  // seconds
  Tensor image;    // [3, H, W] in [0, 1]
};

struct VideoClip {
  std::string id;
  double duration = 0.0;
  std::vector<Frame> frames;  // timestamps strictly increasing, within [0, duration]
  audio::AudioBuffer audio_track;
  int label = -1;  // -1 = unlabelled
  void validate() const;
};

enum class Split { kTrain, kVal, kTest };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct Corpus {
  std::vector<VideoClip> clips;
  std::vector<int> train, val, test;  // disjoint clip indices covering all clips
  std::vector<std::string> class_names;
  const std::vector<int>& split(Split s) const;
  int num_classes() const { return static_cast<int>(class_names.size()); }
  void validate() const;
};

// ---------------------------------------------------------------------------
// Synthetic corpus. Each class couples a visual signature (a distinct motif
// shape over a class-specific background grating) with an audio signature
// (a harmonic stack on a class-specific fundamental). Every clip additionally
// carries a "variant": a small saturated colour patch in the frames paired
// with a harmonic timbre mask in the audio. Variants give positive pairs an
// instance-level cue beyond class identity, which is what lifts the
// correspondence ceiling above plain class matching when same-class negatives
// occur. A configurable fraction of clips is "decorrelated": their audio is
// swapped to a different class's signature while the label keeps describing
// the visuals.
// ---------------------------------------------------------------------------
struct SynthSpec {
  int num_classes = 8;
  int clips_per_class = 32;
  double duration = 4.0;
  int image_size = 80;
  int sample_rate = 8000;
  int frames_per_clip = 5;
  int variants = 4;
  float decorrelated_fraction = 0.f;
  double train_fraction = 0.6;
  double val_fraction = 0.15;
  std::uint64_t seed = 1;
  void validate() const;
};

Corpus generate_synthetic_corpus(const SynthSpec& spec);

// Fundamental frequency assigned to a class; exposed for test oracles.
double class_fundamental_hz(const SynthSpec& spec, int class_idx);

// ---------------------------------------------------------------------------
// Directory layout: <root>/<clip_id>/audio.wav, <root>/<clip_id>/frames/
// <milliseconds>.ppm, optional <root>/<clip_id>/label.txt. Splits are not
// part of the layout; ingest assigns them from the given fractions,
// stratified by label, deterministically in split_seed.
// ---------------------------------------------------------------------------
Corpus ingest_directory(const std::string& root, double train_fraction = 1.0,
                        double val_fraction = 0.0, std::uint64_t split_seed = 0);
void export_corpus(const Corpus& corpus, const std::string& root);

// ---------------------------------------------------------------------------
// Frame augmentation: scale shortest side, crop (random in train mode,
// centred otherwise), random horizontal flip, brightness and saturation
// jitter; eval mode is scale + centre crop only. Output clamped to [0, 1].
// ---------------------------------------------------------------------------
struct AugmentConfig {
  int scale_size = 256;
  int crop = 224;
  float brightness = 0.125f;  // additive offset drawn from [-b, +b]
  float saturation_lo = 0.8f;
  float saturation_hi = 1.2f;
};

Tensor augment_frame(const Tensor& image, Rng& rng, bool train_mode,
                     const AugmentConfig& cfg);

// ---------------------------------------------------------------------------
// AVC pair sampling. Provenance is drawn first (cheap); materialization
// renders the augmented frame and the log spectrogram.
// ---------------------------------------------------------------------------
struct PairProvenance {
  int frame_clip = -1;
  int audio_clip = -1;
  double frame_time = 0.0;
  double audio_start = 0.0;
  bool positive = false;
};

struct PipelineConfig {
  AugmentConfig aug;
  audio::SpectrogramConfig spec;
};

struct AVCPair {
  Tensor frame;        // [3, crop, crop]
  Tensor spectrogram;  // [bands, windows]
  bool correspond = false;
  PairProvenance prov;
};

PairProvenance sample_pair_provenance(const Corpus& corpus, Split split, bool positive,
                                      Rng& rng);
AVCPair materialize_pair(const Corpus& corpus, const PairProvenance& prov, Rng& rng,
                         const PipelineConfig& cfg, bool train_mode);
AVCPair sample_avc_pair(const Corpus& corpus, Split split, bool positive, Rng& rng,
                        const PipelineConfig& cfg, bool train_mode = true);

// Exactly one second of a clip's audio starting at `start` seconds, resampled
// to target_rate when the track rate differs. Windows that would cross the
// clip end are clamped back.
audio::AudioBuffer clip_audio_window(const VideoClip& clip, double start, int target_rate);

// Sanity oracle: nearest-centroid classification over time-averaged
// spectrogram columns (train split fits the centroids, test split scores).
double nearest_centroid_accuracy(const Corpus& corpus, const audio::SpectrogramConfig& cfg);

}  // namespace l3::corpus
