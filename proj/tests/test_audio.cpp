#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "l3/audio.hpp"
#include "l3/rng.hpp"

using l3::Rng;
using l3::Tensor;
namespace audio = l3::audio;

namespace {

audio::AudioBuffer sine(double freq, double amp, int rate, int n) {
  audio::AudioBuffer b;
  b.sample_rate = rate;
  b.samples.resize(n);
  for (int i = 0; i < n; ++i)
    b.samples[i] = static_cast<float>(amp * std::sin(2.0 * 3.14159265358979323846 * freq * i / rate));
  return b;
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "l3_audio_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("resample at the same rate returns the buffer unchanged") {
  Rng rng(1);
  audio::AudioBuffer b;
  b.sample_rate = 48000;
  b.samples.resize(48000);
  for (auto& s : b.samples) s = rng.uniform(-1.f, 1.f);
  audio::AudioBuffer r = audio::resample(b, 48000);
  REQUIRE(r.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < b.samples.size(); ++i) CHECK(r.samples[i] == b.samples[i]);
}

TEST_CASE("resample length formula and linear-interpolation oracle on a ramp") {
  audio::AudioBuffer b;
  b.sample_rate = 24000;
  b.samples.resize(24000);
  for (int i = 0; i < 24000; ++i) b.samples[i] = static_cast<float>(i) / 24000.f;
  audio::AudioBuffer r = audio::resample(b, 48000);
  CHECK(r.samples.size() == 48000);
  CHECK(r.sample_rate == 48000);

  // away from the edges the ramp must match linear interpolation closely
  for (std::size_t j = 200; j < r.samples.size() - 200; j += 997) {
    const double pos = static_cast<double>(j) * 24000.0 / 48000.0;
    const double expect = pos / 24000.0;
    CHECK(std::abs(r.samples[j] - expect) <= 2e-3);
  }
}

TEST_CASE("resample preserves constants exactly at any rate pair") {
  for (auto [from, to] : {std::pair{48000, 32000}, std::pair{22050, 48000}}) {
    audio::AudioBuffer b;
    b.sample_rate = from;
    b.samples.assign(static_cast<std::size_t>(from), 0.5f);
    audio::AudioBuffer r = audio::resample(b, to);
    CHECK(r.samples.size() == static_cast<std::size_t>(to));
    for (float v : r.samples) CHECK(std::abs(v - 0.5f) <= 1e-6f);
  }
}

TEST_CASE("resample rejects empty buffers and bad rates") {
  audio::AudioBuffer empty;
  empty.sample_rate = 48000;
  CHECK_THROWS(audio::resample(empty, 24000));
  audio::AudioBuffer b;
  b.sample_rate = 48000;
  b.samples.assign(100, 0.f);
  CHECK_THROWS(audio::resample(b, 0));
  CHECK_THROWS(audio::resample(b, -5));
}

TEST_CASE("resample round trip reproduces a band-limited tone within 0.05") {
  audio::AudioBuffer tone = sine(997.0, 0.9, 48000, 48000);
  audio::AudioBuffer down = audio::resample(tone, 32000);
  audio::AudioBuffer back = audio::resample(down, 48000);
  REQUIRE(back.samples.size() == tone.samples.size());
  float worst = 0.f;
  for (std::size_t i = 0; i < tone.samples.size(); ++i)
    worst = std::max(worst, std::abs(back.samples[i] - tone.samples[i]));
  CHECK(worst <= 0.05f);
}

TEST_CASE("log spectrogram of one second at 48 kHz is 257x199") {
  audio::SpectrogramConfig cfg;
  audio::AudioBuffer b = sine(440.0, 0.5, 48000, 48000);
  Tensor s = audio::log_spectrogram(b, cfg);
  CHECK(s.shape() == std::vector<int>({257, 199}));
  CHECK(cfg.window_samples() == 480);
  CHECK(cfg.hop_samples() == 240);
}

TEST_CASE("window count formula: floor((N - W) / H) + 1") {
  audio::SpectrogramConfig cfg;
  CHECK((48000 - 480) / 240 + 1 == 199);
  CHECK(cfg.time_windows(48000) == 199);

  audio::SpectrogramConfig tiny;
  tiny.sample_rate = 8000;
  tiny.window_sec = 0.016;
  tiny.hop_fraction = 1.0;
  tiny.fft_size = 128;
  CHECK(tiny.window_samples() == 128);
  CHECK(tiny.time_windows(8000) == 62);
  CHECK(tiny.freq_bands() == 65);
}

TEST_CASE("log spectrogram of silence is log(epsilon) everywhere") {
  audio::SpectrogramConfig cfg;
  audio::AudioBuffer b;
  b.sample_rate = 48000;
  b.samples.assign(48000, 0.f);
  Tensor s = audio::log_spectrogram(b, cfg);
  const float expect = std::log(cfg.epsilon);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("pure 937.5 Hz sine peaks at bin 10 in every window, matching a direct DFT") {
  audio::SpectrogramConfig cfg;
  audio::AudioBuffer b = sine(937.5, 0.5, 48000, 48000);
  Tensor s = audio::log_spectrogram(b, cfg);
  for (int t = 0; t < s.dim(1); ++t) {
    int arg = 0;
    float best = s.at(0, t);
    for (int f = 1; f < s.dim(0); ++f)
      if (s.at(f, t) > best) {
        best = s.at(f, t);
        arg = f;
      }
    CHECK(arg == 10);
  }

  // direct DFT oracle on the first window
  const int W = cfg.window_samples();
  std::vector<double> frame(W);
  for (int i = 0; i < W; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * i / W);
    frame[i] = b.samples[i] * hann;
  }
  for (int f = 0; f < 257; f += 16) {
    const double mag = audio::dft_bin_magnitude(frame, cfg.fft_size, f);
    CHECK(s.at(f, 0) == doctest::Approx(std::log(mag + cfg.epsilon)).epsilon(1e-5));
  }
}

TEST_CASE("log spectrogram rejects wrong lengths and rates") {
  audio::SpectrogramConfig cfg;
  audio::AudioBuffer b = sine(440.0, 0.5, 48000, 24000);
  CHECK_THROWS(audio::log_spectrogram(b, cfg));
  audio::AudioBuffer wrong_rate = sine(440.0, 0.5, 44100, 44100);
  CHECK_THROWS(audio::log_spectrogram(wrong_rate, cfg));
}

TEST_CASE("doubling the amplitude raises log magnitudes by log 2") {
  Rng rng(5);
  audio::AudioBuffer b;
  b.sample_rate = 48000;
  b.samples.resize(48000);
  for (auto& s : b.samples) s = 0.25f * rng.uniform(-1.f, 1.f);
  audio::AudioBuffer b2 = b;
  for (auto& s : b2.samples) s *= 2.f;

  audio::SpectrogramConfig cfg;
  Tensor s1 = audio::log_spectrogram(b, cfg);
  Tensor s2 = audio::log_spectrogram(b2, cfg);
  const float floor = std::log(1e-3f);  // |STFT| well above epsilon
  int checked = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    if (s1[i] < floor) continue;
    ++checked;
    CHECK(std::abs((s2[i] - s1[i]) - std::log(2.f)) <= 1e-3f);
  }
  CHECK(checked > 1000);
}

TEST_CASE("volume jitter scales consistently and deterministically") {
  audio::AudioBuffer ones;
  ones.sample_rate = 48000;
  ones.samples.assign(1000, 1.f);
  Rng rng(7);
  audio::AudioBuffer out = audio::volume_jitter(ones, rng);
  const float s = out.samples[0];
  CHECK(s >= 0.9f);
  CHECK(s <= 1.1f);
  for (float v : out.samples) CHECK(v == s);

  audio::AudioBuffer zeros;
  zeros.sample_rate = 48000;
  zeros.samples.assign(100, 0.f);
  Rng rng2(8);
  for (float v : audio::volume_jitter(zeros, rng2).samples) CHECK(v == 0.f);

  Rng ra(99), rb(99);
  audio::AudioBuffer ja = audio::volume_jitter(ones, ra);
  audio::AudioBuffer jb = audio::volume_jitter(ones, rb);
  for (std::size_t i = 0; i < ja.samples.size(); ++i) CHECK(ja.samples[i] == jb.samples[i]);
}

TEST_CASE("wav round trip: mono PCM16") {
  Rng rng(11);
  audio::AudioBuffer b;
  b.sample_rate = 22050;
  b.samples.resize(5000);
  for (auto& s : b.samples) s = rng.uniform(-0.99f, 0.99f);
  const auto path = temp_file("roundtrip.wav");
  audio::write_wav(path.string(), b);
  audio::AudioBuffer r = audio::read_wav(path.string());
  CHECK(r.sample_rate == 22050);
  REQUIRE(r.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < b.samples.size(); ++i)
    CHECK(std::abs(r.samples[i] - b.samples[i]) <= 1.f / 32768.f);
}

TEST_CASE("wav reader downmixes stereo by averaging") {
  // hand-built stereo file: left = 0.5, right = -0.5 -> mean 0
  const auto path = temp_file("stereo.wav");
  {
    std::ofstream f(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
    const int frames = 10;
    f.write("RIFF", 4);
    u32(36 + frames * 4);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(2);
    u32(8000);
    u32(8000 * 4);
    u16(4);
    u16(16);
    f.write("data", 4);
    u32(frames * 4);
    for (int i = 0; i < frames; ++i) {
      u16(static_cast<std::uint16_t>(16384));   // left +0.5
      u16(static_cast<std::uint16_t>(-16384));  // right -0.5
    }
  }
  audio::AudioBuffer r = audio::read_wav(path.string());
  CHECK(r.sample_rate == 8000);
  REQUIRE(r.samples.size() == 10);
  for (float v : r.samples) CHECK(std::abs(v) <= 1e-4f);
}

TEST_CASE("wav reader reports malformed files with the path") {
  const auto path = temp_file("bad.wav");
  {
    std::ofstream f(path, std::ios::binary);
    f << "definitely not a wav file";
  }
  bool threw = false;
  try {
    audio::read_wav(path.string());
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find(path.filename().string()) != std::string::npos);
  }
  CHECK(threw);

  const auto trunc = temp_file("trunc.wav");
  {
    std::ofstream f(trunc, std::ios::binary);
    f << "RIFF";
  }
  CHECK_THROWS_AS(audio::read_wav(trunc.string()), std::runtime_error);
  CHECK_THROWS_AS(audio::read_wav("/nonexistent/nowhere.wav"), std::runtime_error);
}
