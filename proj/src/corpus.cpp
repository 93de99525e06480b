#include "l3/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "l3/image.hpp"

namespace fs = std::filesystem;

namespace l3::corpus {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Naming pool for synthetic classes (human-action flavoured).
const char* kClassNames[] = {
    "bowling",       "typing",    "singing",   "laughing",  "stomping",
    "fingerpicking", "tickling",  "patting",   "drumming",  "shoveling",
    "clapping",      "whistling", "knocking",  "sweeping",  "sawing",
    "hammering",     "dripping",  "stirring",  "buzzing",   "ringing",
    "scratching",    "snapping",  "tapping",   "rustling",  "crunching",
    "splashing",     "popping",   "ticking",   "humming",   "rattling",
    "chopping",      "brushing",  "jingling",  "thudding",
};
constexpr int kNamePool = static_cast<int>(sizeof(kClassNames) / sizeof(kClassNames[0]));

// Timbre masks per variant: multiplier applied to harmonics 1..8.
const float kTimbreMask[4][8] = {
    {1.0f, 1.0f, 1.0f, 1.0f, 1.0f, 1.0f, 1.0f, 1.0f},
    {1.0f, 0.15f, 1.0f, 0.15f, 1.0f, 0.15f, 1.0f, 0.15f},
    {0.45f, 1.35f, 0.45f, 1.35f, 0.45f, 1.35f, 0.45f, 1.35f},
    {1.2f, 0.25f, 0.25f, 1.2f, 1.2f, 0.25f, 0.25f, 0.25f},
};

// Accent colours per variant (cycled when variants > 4).
const float kAccent[4][3] = {
    {1.0f, 0.15f, 0.15f},
    {0.15f, 1.0f, 0.15f},
    {0.2f, 0.35f, 1.0f},
    {1.0f, 1.0f, 0.2f},
};

struct ClipPlan {
  int cls = 0;          // visual class; also the label
  int audio_cls = 0;    // differs from cls for decorrelated clips
  int variant = 0;
  std::uint64_t index = 0;  // global clip index, rng key
};

float clamp01(float v) { return std::min(1.f, std::max(0.f, v)); }

void render_audio(const SynthSpec& spec, const ClipPlan& plan, VideoClip& clip) {
  Rng rng = derive_rng(spec.seed, plan.index, 2);
  const double f0 = class_fundamental_hz(spec, plan.audio_cls) *
                    (1.0 + 0.01 * (rng.uniform_double() * 2.0 - 1.0));
  const int rate = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * rate));

  int harmonics = 0;
  while (harmonics < 8 && (harmonics + 1) * f0 <= 0.45 * rate) ++harmonics;
  harmonics = std::max(harmonics, 1);

  const float* mask = kTimbreMask[plan.variant % 4];
  const float detune = std::pow(2.f, 0.04f * static_cast<float>(plan.variant / 4));
  double amp[8], phase[8];
  for (int h = 0; h < harmonics; ++h) {
    amp[h] = mask[h] / std::pow(h + 1.0, 0.7);
    phase[h] = rng.uniform_double() * 2.0 * kPi;
  }

  clip.audio_track.sample_rate = rate;
  clip.audio_track.samples.resize(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double s = 0.0;
    for (int h = 0; h < harmonics; ++h)
      s += amp[h] * std::sin(2.0 * kPi * f0 * detune * (h + 1) * t + phase[h]);
    s += 0.02 * (rng.uniform_double() * 2.0 - 1.0);
    clip.audio_track.samples[i] = static_cast<float>(s);
    peak = std::max(peak, std::abs(s));
  }
  const float scale = peak > 0.0 ? static_cast<float>(0.65 / peak) : 1.f;
  for (auto& s : clip.audio_track.samples) s *= scale;
}

void draw_motif(Tensor& img, int shape, float cx, float cy, float r, float lum) {
  const int H = img.dim(1), W = img.dim(2);
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const int y0 = std::max(0, static_cast<int>(cy - r - 1));
  const int y1 = std::min(H - 1, static_cast<int>(cy + r + 1));
  const int x0 = std::max(0, static_cast<int>(cx - r - 1));
  const int x1 = std::min(W - 1, static_cast<int>(cx + r + 1));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const float dx = x - cx, dy = y - cy;
      bool in = false;
      switch (shape % 8) {
        case 0: in = dx * dx + dy * dy <= r * r; break;
        case 1: in = std::abs(dx) <= r && std::abs(dy) <= r; break;
        case 2: in = dy >= -r && dy <= r && std::abs(dx) <= (dy + r) * 0.5f; break;
        case 3:
          in = (std::abs(dx) <= r / 3 && std::abs(dy) <= r) ||
               (std::abs(dy) <= r / 3 && std::abs(dx) <= r);
          break;
        case 4: {
          const float d2 = dx * dx + dy * dy;
          in = d2 <= r * r && d2 >= 0.36f * r * r;
          break;
        }
        case 5:
          in = std::abs(dx) <= r && std::abs(dy) <= r &&
               (static_cast<int>(std::floor((dx + dy) * 0.5f)) % 3 + 3) % 3 < 1;
          break;
        case 6: {
          const float rr = r / 2.8f;
          for (int k = -1; k <= 1 && !in; ++k) {
            const float ddx = dx - k * r * 0.8f;
            in = ddx * ddx + dy * dy <= rr * rr;
          }
          break;
        }
        default:
          in = std::abs(dx) <= r && std::abs(dy) <= r &&
               ((static_cast<int>(std::floor(dx / 4)) + static_cast<int>(std::floor(dy / 4))) &
                1) == 0;
          break;
      }
      if (!in) continue;
      for (int c = 0; c < 3; ++c)
        img[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * W + x] = lum;
    }
  }
}

void render_frames(const SynthSpec& spec, const ClipPlan& plan, VideoClip& clip) {
  Rng rng = derive_rng(spec.seed, plan.index, 1);
  const int S = spec.image_size;
  const std::size_t plane = static_cast<std::size_t>(S) * S;

  const float base = 0.25f + rng.uniform(-0.05f, 0.05f);
  const float grad = rng.uniform(-0.05f, 0.05f);

  struct Rect {
    int x, y, w, h;
    float g;
  };
  std::vector<Rect> clutter(5);
  for (auto& r : clutter) {
    r.x = rng.uniform_int(S);
    r.y = rng.uniform_int(S);
    r.w = 2 + rng.uniform_int(S / 4);
    r.h = 2 + rng.uniform_int(S / 4);
    r.g = rng.uniform(0.1f, 0.6f);
  }

  const float motif_r = S * (0.16f + rng.uniform(-0.02f, 0.02f));
  float mx = rng.uniform(motif_r + 1, S - motif_r - 1);
  float my = rng.uniform(motif_r + 1, S - motif_r - 1);
  const float vx = rng.uniform(-0.02f, 0.02f) * S;  // drift per second
  const float vy = rng.uniform(-0.02f, 0.02f) * S;

  const int accent_size = std::max(3, S / 8);
  const int ax = rng.uniform_int(S - accent_size);
  const int ay = rng.uniform_int(S - accent_size);
  const float* accent = kAccent[plan.variant % 4];

  // class texture: an oriented luminance grating
  const float theta = static_cast<float>(plan.cls % 8) * static_cast<float>(kPi) / 8.f;
  const float freq = 3.f + static_cast<float>(plan.cls % 8);
  const float cth = std::cos(theta), sth = std::sin(theta);

  Rng frame_noise = derive_rng(spec.seed, plan.index, 3);
  clip.frames.resize(spec.frames_per_clip);
  for (int fi = 0; fi < spec.frames_per_clip; ++fi) {
    const double t = (fi + 0.5) * spec.duration / spec.frames_per_clip;
    Frame& frame = clip.frames[fi];
    frame.t = t;
    frame.image = Tensor({3, S, S});
    Tensor& img = frame.image;

    for (int y = 0; y < S; ++y)
      for (int x = 0; x < S; ++x) {
        const float g =
            base + grad * (static_cast<float>(y) / S - 0.5f) +
            0.10f * std::sin(2.f * static_cast<float>(kPi) * freq * (x * cth + y * sth) / S);
        for (int c = 0; c < 3; ++c)
          img[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * S + x] = g;
      }

    for (const auto& r : clutter)
      for (int y = r.y; y < std::min(S, r.y + r.h); ++y)
        for (int x = r.x; x < std::min(S, r.x + r.w); ++x)
          for (int c = 0; c < 3; ++c)
            img[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * S + x] = r.g;

    const float cx = std::min(S - motif_r - 1,
                              std::max(motif_r + 1, mx + vx * static_cast<float>(t)));
    const float cy = std::min(S - motif_r - 1,
                              std::max(motif_r + 1, my + vy * static_cast<float>(t)));
    draw_motif(img, plan.cls, cx, cy, motif_r, 0.85f);

    for (int y = ay; y < ay + accent_size; ++y)
      for (int x = ax; x < ax + accent_size; ++x)
        for (int c = 0; c < 3; ++c)
          img[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * S + x] =
              accent[c];

    for (std::size_t i = 0; i < img.size(); ++i)
      img[i] = clamp01(img[i] + frame_noise.uniform(-0.015f, 0.015f));
  }
}

std::vector<int> stratified_shuffle(int count, Rng& rng) {
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = i;
  for (int i = count - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
  return idx;
}

}  // namespace

void VideoClip::validate() const {
  if (audio_track.samples.empty() || audio_track.sample_rate <= 0)
    throw std::invalid_argument("clip " + id + ": missing audio");
  const double len_sec = audio_track.duration();
  const double tol = 1.5 / audio_track.sample_rate;
  if (std::abs(len_sec - duration) > tol)
    throw std::invalid_argument("clip " + id + ": audio length " + std::to_string(len_sec) +
                                " s does not match duration " + std::to_string(duration));
  double prev = -1.0;
  for (const auto& f : frames) {
    if (f.t <= prev || f.t < 0.0 || f.t > duration)
      throw std::invalid_argument("clip " + id + ": frame timestamps must be strictly " +
                                  "increasing within [0, duration]");
    prev = f.t;
  }
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    default: return "test";
  }
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + name + "' (expected train/val/test)");
}

const std::vector<int>& Corpus::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    default: return test;
  }
}

void Corpus::validate() const {
  std::set<int> seen;
  for (const auto* sp : {&train, &val, &test})
    for (int i : *sp) {
      if (i < 0 || i >= static_cast<int>(clips.size()))
        throw std::invalid_argument("split references clip index out of range");
      if (!seen.insert(i).second)
        throw std::invalid_argument("splits are not disjoint");
    }
  if (seen.size() != clips.size())
    throw std::invalid_argument("splits do not cover all clips");
  if (!class_names.empty())
    for (const auto& c : clips)
      if (c.label >= static_cast<int>(class_names.size()))
        throw std::invalid_argument("clip " + c.id + ": label outside class_names");
}

void SynthSpec::validate() const {
  if (num_classes < 1 || clips_per_class < 1 || frames_per_clip < 1 || variants < 1)
    throw std::invalid_argument("synthetic spec: counts must be positive");
  if (duration < 1.0)
    throw std::invalid_argument("synthetic spec: clips must last at least 1 s");
  if (image_size < 16 || sample_rate < 2000)
    throw std::invalid_argument("synthetic spec: image size or sample rate too small");
  if (decorrelated_fraction < 0.f || decorrelated_fraction > 1.f)
    throw std::invalid_argument("synthetic spec: decorrelated fraction must be in [0, 1]");
  if (train_fraction < 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0)
    throw std::invalid_argument("synthetic spec: invalid split fractions");
}

double class_fundamental_hz(const SynthSpec& spec, int class_idx) {
  // geometric ladder from 150 Hz, 0.4 octaves apart
  return 150.0 * std::pow(2.0, 0.4 * class_idx);
}

Corpus generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  Corpus corpus;
  for (int c = 0; c < spec.num_classes; ++c) {
    std::string name = kClassNames[c % kNamePool];
    if (c >= kNamePool) name += "_" + std::to_string(c / kNamePool + 1);
    corpus.class_names.push_back(name);
  }

  // plan every clip first so rendering can run in parallel
  std::vector<ClipPlan> plans;
  for (int c = 0; c < spec.num_classes; ++c) {
    Rng cls_rng = derive_rng(spec.seed, 0x5EED0000ULL + c);
    const int n = spec.clips_per_class;
    const int n_dec = static_cast<int>(std::lround(spec.decorrelated_fraction * n));
    std::vector<int> order = stratified_shuffle(n, cls_rng);
    std::vector<bool> decorrelated(n, false);
    for (int j = 0; j < n_dec; ++j) decorrelated[order[j]] = true;
    for (int k = 0; k < n; ++k) {
      ClipPlan plan;
      plan.cls = c;
      plan.variant = k % spec.variants;
      plan.index = static_cast<std::uint64_t>(c) * spec.clips_per_class + k;
      plan.audio_cls = c;
      if (decorrelated[k] && spec.num_classes > 1)
        plan.audio_cls = (c + 1 + cls_rng.uniform_int(spec.num_classes - 1)) % spec.num_classes;
      plans.push_back(plan);
    }
  }

  corpus.clips.resize(plans.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(plans.size()); ++i) {
    const ClipPlan& plan = plans[static_cast<std::size_t>(i)];
    VideoClip& clip = corpus.clips[static_cast<std::size_t>(i)];
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "clip_%05llu",
                  static_cast<unsigned long long>(plan.index));
    clip.id = idbuf;
    clip.duration = spec.duration;
    clip.label = plan.cls;
    render_audio(spec, plan, clip);
    render_frames(spec, plan, clip);
    clip.validate();
  }

  // stratified splits
  for (int c = 0; c < spec.num_classes; ++c) {
    Rng split_rng = derive_rng(spec.seed, 0x51117000ULL + c);
    const int n = spec.clips_per_class;
    std::vector<int> order = stratified_shuffle(n, split_rng);
    const int n_train = static_cast<int>(std::lround(spec.train_fraction * n));
    const int n_val = static_cast<int>(std::lround(spec.val_fraction * n));
    for (int k = 0; k < n; ++k) {
      const int clip_idx = c * spec.clips_per_class + order[k];
      if (k < n_train)
        corpus.train.push_back(clip_idx);
      else if (k < n_train + n_val)
        corpus.val.push_back(clip_idx);
      else
        corpus.test.push_back(clip_idx);
    }
  }
  corpus.validate();
  return corpus;
}

Corpus ingest_directory(const std::string& root, double train_fraction, double val_fraction,
                        std::uint64_t split_seed) {
  if (!fs::is_directory(root))
    throw std::runtime_error("ingest: " + root + " is not a directory");
  std::vector<fs::path> clip_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) clip_dirs.push_back(e.path());
  std::sort(clip_dirs.begin(), clip_dirs.end());
  if (clip_dirs.empty()) throw std::runtime_error("ingest: " + root + " contains no clips");

  Corpus corpus;
  int max_label = -1;
  for (const auto& dir : clip_dirs) {
    VideoClip clip;
    clip.id = dir.filename().string();
    const fs::path wav = dir / "audio.wav";
    if (!fs::exists(wav))
      throw std::runtime_error("ingest: clip " + clip.id + ": missing audio.wav");
    clip.audio_track = audio::read_wav(wav.string());
    clip.duration = clip.audio_track.duration();

    const fs::path frames_dir = dir / "frames";
    std::vector<std::pair<long, fs::path>> frame_files;
    if (fs::is_directory(frames_dir)) {
      for (const auto& e : fs::directory_iterator(frames_dir)) {
        if (e.path().extension() != ".ppm") continue;
        try {
          frame_files.emplace_back(std::stol(e.path().stem().string()), e.path());
        } catch (const std::exception&) {
          throw std::runtime_error("ingest: clip " + clip.id + ": frame file " +
                                   e.path().filename().string() +
                                   " is not named <milliseconds>.ppm");
        }
      }
    }
    if (frame_files.empty())
      throw std::runtime_error("ingest: clip " + clip.id + ": no frames found");
    std::sort(frame_files.begin(), frame_files.end());
    for (const auto& [ms, path] : frame_files) {
      Frame f;
      f.t = static_cast<double>(ms) / 1000.0;
      f.image = img::read_ppm(path.string());
      clip.frames.push_back(std::move(f));
    }

    const fs::path label_file = dir / "label.txt";
    if (fs::exists(label_file)) {
      std::ifstream lf(label_file);
      int label = -1;
      if (!(lf >> label) || label < 0)
        throw std::runtime_error("ingest: clip " + clip.id + ": malformed label.txt");
      clip.label = label;
      max_label = std::max(max_label, label);
    }
    try {
      clip.validate();
    } catch (const std::exception& e) {
      throw std::runtime_error("ingest: " + std::string(e.what()));
    }
    corpus.clips.push_back(std::move(clip));
  }
  for (int c = 0; c <= max_label; ++c)
    corpus.class_names.push_back("class_" + std::to_string(c));

  // deterministic stratified split assignment
  std::vector<std::vector<int>> strata;
  if (max_label >= 0) {
    strata.resize(static_cast<std::size_t>(max_label) + 1);
    for (int i = 0; i < static_cast<int>(corpus.clips.size()); ++i)
      strata[static_cast<std::size_t>(std::max(0, corpus.clips[i].label))].push_back(i);
  } else {
    strata.emplace_back();
    for (int i = 0; i < static_cast<int>(corpus.clips.size()); ++i) strata[0].push_back(i);
  }
  for (std::size_t s = 0; s < strata.size(); ++s) {
    Rng rng = derive_rng(split_seed, 0x51117000ULL + s);
    const int n = static_cast<int>(strata[s].size());
    std::vector<int> order = stratified_shuffle(n, rng);
    const int n_train = static_cast<int>(std::lround(train_fraction * n));
    const int n_val = static_cast<int>(std::lround(val_fraction * n));
    for (int k = 0; k < n; ++k) {
      const int idx = strata[s][static_cast<std::size_t>(order[k])];
      if (k < n_train)
        corpus.train.push_back(idx);
      else if (k < n_train + n_val)
        corpus.val.push_back(idx);
      else
        corpus.test.push_back(idx);
    }
  }
  corpus.validate();
  return corpus;
}

void export_corpus(const Corpus& corpus, const std::string& root) {
  fs::create_directories(root);
  for (const auto& clip : corpus.clips) {
    const fs::path dir = fs::path(root) / clip.id;
    fs::create_directories(dir / "frames");
    audio::write_wav((dir / "audio.wav").string(), clip.audio_track);
    for (const auto& f : clip.frames) {
      const long ms = std::lround(f.t * 1000.0);
      img::write_ppm((dir / "frames" / (std::to_string(ms) + ".ppm")).string(), f.image);
    }
    if (clip.label >= 0) {
      std::ofstream lf(dir / "label.txt");
      lf << clip.label << "\n";
    }
  }
}

Tensor augment_frame(const Tensor& image, Rng& rng, bool train_mode,
                     const AugmentConfig& cfg) {
  if (image.ndim() != 3 || image.dim(0) != 3 || image.dim(1) < 1 || image.dim(2) < 1)
    throw std::invalid_argument("augment_frame: image must be a non-degenerate [3, H, W]");
  if (cfg.crop > cfg.scale_size)
    throw std::invalid_argument("augment_frame: crop larger than scaled size");

  Tensor scaled = img::scale_shortest_side(image, cfg.scale_size);
  const int H = scaled.dim(1), W = scaled.dim(2);
  int top, left;
  if (train_mode) {
    top = rng.uniform_int(H - cfg.crop + 1);
    left = rng.uniform_int(W - cfg.crop + 1);
  } else {
    top = (H - cfg.crop) / 2;
    left = (W - cfg.crop) / 2;
  }
  Tensor out = img::crop(scaled, top, left, cfg.crop, cfg.crop);
  if (!train_mode) return out;

  if (rng.bernoulli(0.5f)) out = img::hflip(out);
  const float b = rng.uniform(-cfg.brightness, cfg.brightness);
  const float s = rng.uniform(cfg.saturation_lo, cfg.saturation_hi);
  const std::size_t plane = out.size() / 3;
  for (std::size_t i = 0; i < plane; ++i) {
    const float r = out[i], g = out[plane + i], bl = out[2 * plane + i];
    const float y = (r + g + bl) / 3.f;
    out[i] = clamp01(y + s * (r - y) + b);
    out[plane + i] = clamp01(y + s * (g - y) + b);
    out[2 * plane + i] = clamp01(y + s * (bl - y) + b);
  }
  return out;
}

PairProvenance sample_pair_provenance(const Corpus& corpus, Split split, bool positive,
                                      Rng& rng) {
  const std::vector<int>& ids = corpus.split(split);
  if (ids.empty()) throw std::invalid_argument("sample_avc_pair: split is empty");

  PairProvenance prov;
  prov.positive = positive;
  const int a = ids[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(ids.size())))];
  const VideoClip& clip_a = corpus.clips[static_cast<std::size_t>(a)];
  if (clip_a.duration < 1.0)
    throw std::invalid_argument("sample_avc_pair: clip " + clip_a.id + " is shorter than 1 s");
  if (clip_a.frames.empty())
    throw std::invalid_argument("sample_avc_pair: clip " + clip_a.id + " has no frames");
  prov.frame_clip = a;
  const auto fi = static_cast<std::size_t>(
      rng.uniform_int(static_cast<int>(clip_a.frames.size())));
  prov.frame_time = clip_a.frames[fi].t;

  if (positive) {
    prov.audio_clip = a;
    const double lo = std::max(0.0, prov.frame_time - 1.0);
    const double hi = std::min(prov.frame_time, clip_a.duration - 1.0);
    prov.audio_start = lo + rng.uniform_double() * (hi - lo);
  } else {
    if (ids.size() < 2)
      throw std::invalid_argument("sample_avc_pair: negatives need at least two clips");
    int pick = rng.uniform_int(static_cast<int>(ids.size()) - 1);
    std::size_t a_pos = 0;
    while (ids[a_pos] != a) ++a_pos;
    if (pick >= static_cast<int>(a_pos)) ++pick;
    const int b = ids[static_cast<std::size_t>(pick)];
    const VideoClip& clip_b = corpus.clips[static_cast<std::size_t>(b)];
    if (clip_b.duration < 1.0)
      throw std::invalid_argument("sample_avc_pair: clip " + clip_b.id + " is shorter than 1 s");
    prov.audio_clip = b;
    prov.audio_start = rng.uniform_double() * (clip_b.duration - 1.0);
  }
  return prov;
}

audio::AudioBuffer clip_audio_window(const VideoClip& clip, double start, int target_rate) {
  const int rate = clip.audio_track.sample_rate;
  const auto len = static_cast<long>(clip.audio_track.samples.size());
  const long want = rate;  // one second at the native rate
  if (len < want)
    throw std::invalid_argument("clip " + clip.id + " is shorter than 1 s of audio");
  long i0 = std::lround(start * rate);
  i0 = std::max(0L, std::min(i0, len - want));

  audio::AudioBuffer window;
  window.sample_rate = rate;
  window.samples.assign(clip.audio_track.samples.begin() + i0,
                        clip.audio_track.samples.begin() + i0 + want);
  if (rate != target_rate) window = audio::resample(window, target_rate);
  // the length formula is exact for a whole second, but guard anyway
  window.samples.resize(static_cast<std::size_t>(target_rate), 0.f);
  return window;
}

AVCPair materialize_pair(const Corpus& corpus, const PairProvenance& prov, Rng& rng,
                         const PipelineConfig& cfg, bool train_mode) {
  const VideoClip& fclip = corpus.clips[static_cast<std::size_t>(prov.frame_clip)];
  const VideoClip& aclip = corpus.clips[static_cast<std::size_t>(prov.audio_clip)];

  const Frame* frame = nullptr;
  for (const auto& f : fclip.frames)
    if (f.t == prov.frame_time) {
      frame = &f;
      break;
    }
  if (!frame) throw std::logic_error("materialize_pair: provenance frame time not found");

  AVCPair pair;
  pair.prov = prov;
  pair.correspond = prov.positive;
  pair.frame = augment_frame(frame->image, rng, train_mode, cfg.aug);
  audio::AudioBuffer window =
      clip_audio_window(aclip, prov.audio_start, cfg.spec.sample_rate);
  window = audio::volume_jitter(window, rng);
  pair.spectrogram = audio::log_spectrogram(window, cfg.spec);
  return pair;
}

AVCPair sample_avc_pair(const Corpus& corpus, Split split, bool positive, Rng& rng,
                        const PipelineConfig& cfg, bool train_mode) {
  const PairProvenance prov = sample_pair_provenance(corpus, split, positive, rng);
  return materialize_pair(corpus, prov, rng, cfg, train_mode);
}

double nearest_centroid_accuracy(const Corpus& corpus, const audio::SpectrogramConfig& cfg) {
  if (corpus.class_names.empty())
    throw std::invalid_argument("nearest_centroid_accuracy needs a labelled corpus");
  const int K = corpus.num_classes();

  auto mean_columns = [&](const VideoClip& clip) {
    const audio::AudioBuffer window = clip_audio_window(clip, 0.0, cfg.sample_rate);
    const Tensor spec = audio::log_spectrogram(window, cfg);
    const int F = spec.dim(0), T = spec.dim(1);
    std::vector<double> mean(static_cast<std::size_t>(F), 0.0);
    for (int f = 0; f < F; ++f) {
      double s = 0.0;
      for (int t = 0; t < T; ++t) s += spec.at(f, t);
      mean[static_cast<std::size_t>(f)] = s / T;
    }
    return mean;
  };

  std::vector<std::vector<double>> centroids(static_cast<std::size_t>(K));
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  for (int idx : corpus.train) {
    const VideoClip& clip = corpus.clips[static_cast<std::size_t>(idx)];
    if (clip.label < 0) continue;
    auto f = mean_columns(clip);
    auto& cen = centroids[static_cast<std::size_t>(clip.label)];
    if (cen.empty()) cen.assign(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) cen[i] += f[i];
    ++counts[static_cast<std::size_t>(clip.label)];
  }
  for (int k = 0; k < K; ++k)
    if (counts[static_cast<std::size_t>(k)] > 0)
      for (auto& v : centroids[static_cast<std::size_t>(k)])
        v /= counts[static_cast<std::size_t>(k)];

  int correct = 0, total = 0;
  for (int idx : corpus.test) {
    const VideoClip& clip = corpus.clips[static_cast<std::size_t>(idx)];
    if (clip.label < 0) continue;
    auto f = mean_columns(clip);
    int best = -1;
    double best_d = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto& cen = centroids[static_cast<std::size_t>(k)];
      if (cen.empty()) continue;
      double d = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) d += (f[i] - cen[i]) * (f[i] - cen[i]);
      if (best < 0 || d < best_d) {
        best = k;
        best_d = d;
      }
    }
    correct += best == clip.label ? 1 : 0;
    ++total;
  }
  if (total == 0) throw std::invalid_argument("nearest_centroid_accuracy: empty test split");
  return static_cast<double>(correct) / total;
}

}  // namespace l3::corpus
