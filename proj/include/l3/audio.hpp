#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "l3/rng.hpp"
#include "l3/tensor.hpp"

namespace l3::audio {

// Mono audio samples in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// STFT log-magnitude settings. Defaults give the 257x199 layout for one
// second at 48 kHz: 0.01 s Hann windows, half-window hop, 512-point FFT.
struct SpectrogramConfig {
  int sample_rate = 48000;
  double window_sec = 0.01;
  double hop_fraction = 0.5;  // hop = window * hop_fraction
  int fft_size = 512;
  float epsilon = 1e-6f;

  int window_samples() const {
    return static_cast<int>(std::lround(window_sec * sample_rate));
  }
  int hop_samples() const {
    return static_cast<int>(std::lround(window_sec * sample_rate * hop_fraction));
  }
  int freq_bands() const { return fft_size / 2 + 1; }
  int time_windows(int num_samples) const {
    return (num_samples - window_samples()) / hop_samples() + 1;
  }
};

// Windowed-sinc polyphase resampler. Output length is
// round(input_length * target_rate / input_rate); constants are preserved
// exactly because each output tap set is renormalized.
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

// Log-magnitude spectrogram of exactly one second of audio at the configured
// rate. Returns a [freq_bands x time_windows] tensor; entry (f, t) is
// log(|STFT| + epsilon) of window t at frequency bin f.
Tensor log_spectrogram(const AudioBuffer& buf, const SpectrogramConfig& cfg);

// Scales the whole buffer by one factor drawn uniformly from [0.9, 1.1].
AudioBuffer volume_jitter(const AudioBuffer& buf, Rng& rng);

// WAV I/O: PCM 16-bit little-endian; stereo inputs are downmixed by
// averaging. Other encodings are rejected with the offending path named.
AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& buf);

// Test oracle: magnitude of the DFT of `frame` at one bin, computed directly.
double dft_bin_magnitude(const std::vector<double>& frame, int fft_size, int bin);

// Goertzel-style single-frequency magnitude of a raw signal; used to locate
// tones independently of the STFT path.
double tone_magnitude(const std::vector<float>& samples, int sample_rate, double freq_hz);

}  // namespace l3::audio
