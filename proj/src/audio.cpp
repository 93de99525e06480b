#include "l3/audio.hpp"

#include <algorithm>
#include <complex>
#include <stdexcept>

namespace l3::audio {

namespace {

constexpr double kPi = 3.14159265358979323846;

void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  if (buf.samples.empty()) throw std::invalid_argument("resample: empty audio buffer");
  if (buf.sample_rate <= 0 || target_rate <= 0)
    throw std::invalid_argument("resample: sample rates must be positive");
  if (buf.sample_rate == target_rate) return buf;

  const std::size_t in_len = buf.samples.size();
  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(in_len) * target_rate / buf.sample_rate));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);

  const double step = static_cast<double>(buf.sample_rate) / target_rate;
  // Low-pass at 95% of the narrower Nyquist, in input-sample units.
  const double cutoff = 0.5 * 0.95 * std::min(1.0, 1.0 / step);
  const int half_taps = 16;
  const double sinc_scale = 2.0 * cutoff;

  for (std::size_t j = 0; j < out_len; ++j) {
    const double center = static_cast<double>(j) * step;
    const auto lo = static_cast<long>(std::ceil(center)) - half_taps;
    const auto hi = static_cast<long>(std::floor(center)) + half_taps;
    double acc = 0.0, wsum = 0.0;
    for (long i = std::max(lo, 0L);
         i <= std::min(hi, static_cast<long>(in_len) - 1); ++i) {
      const double x = static_cast<double>(i) - center;
      double s;
      if (std::abs(x) < 1e-9) {
        s = sinc_scale;
      } else {
        s = std::sin(2.0 * kPi * cutoff * x) / (kPi * x);
      }
      // Hann taper over the tap span
      const double wnd = 0.5 + 0.5 * std::cos(kPi * x / (half_taps + 1));
      const double w = s * wnd;
      acc += w * buf.samples[static_cast<std::size_t>(i)];
      wsum += w;
    }
    // renormalizing by the tap sum keeps constants exact, also at the edges
    out.samples[j] = wsum != 0.0 ? static_cast<float>(acc / wsum) : 0.f;
  }
  return out;
}

Tensor log_spectrogram(const AudioBuffer& buf, const SpectrogramConfig& cfg) {
  if (buf.sample_rate != cfg.sample_rate)
    throw std::invalid_argument(
        "log_spectrogram: buffer rate " + std::to_string(buf.sample_rate) +
        " does not match configured rate " + std::to_string(cfg.sample_rate));
  if (buf.samples.size() != static_cast<std::size_t>(cfg.sample_rate))
    throw std::invalid_argument(
        "log_spectrogram: expected exactly 1 second (" + std::to_string(cfg.sample_rate) +
        " samples), got " + std::to_string(buf.samples.size()));
  const int W = cfg.window_samples();
  const int H = cfg.hop_samples();
  if (W <= 0 || H <= 0 || W > cfg.fft_size)
    throw std::invalid_argument("log_spectrogram: invalid window/hop/fft configuration");

  const int bands = cfg.freq_bands();
  const int frames = cfg.time_windows(static_cast<int>(buf.samples.size()));
  Tensor spec({bands, frames});

  // periodic Hann
  std::vector<double> window(W);
  for (int i = 0; i < W; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / W);

  std::vector<std::complex<double>> fft_buf(cfg.fft_size);
  for (int t = 0; t < frames; ++t) {
    const float* seg = buf.samples.data() + static_cast<std::size_t>(t) * H;
    for (int i = 0; i < W; ++i) fft_buf[i] = seg[i] * window[i];
    for (int i = W; i < cfg.fft_size; ++i) fft_buf[i] = 0.0;
    fft_radix2(fft_buf);
    for (int f = 0; f < bands; ++f)
      spec.at(f, t) = static_cast<float>(std::log(std::abs(fft_buf[f]) + cfg.epsilon));
  }
  return spec;
}

AudioBuffer volume_jitter(const AudioBuffer& buf, Rng& rng) {
  if (buf.samples.empty()) throw std::invalid_argument("volume_jitter: empty audio buffer");
  const float s = rng.uniform(0.9f, 1.1f);
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.samples.resize(buf.samples.size());
  for (std::size_t i = 0; i < buf.samples.size(); ++i) out.samples[i] = buf.samples[i] * s;
  return out;
}

double dft_bin_magnitude(const std::vector<double>& frame, int fft_size, int bin) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < frame.size(); ++n) {
    const double ang = -2.0 * kPi * bin * static_cast<double>(n) / fft_size;
    re += frame[n] * std::cos(ang);
    im += frame[n] * std::sin(ang);
  }
  return std::sqrt(re * re + im * im);
}

double tone_magnitude(const std::vector<float>& samples, int sample_rate, double freq_hz) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const double ang = -2.0 * kPi * freq_hz * static_cast<double>(n) / sample_rate;
    re += samples[n] * std::cos(ang);
    im += samples[n] * std::sin(ang);
  }
  return std::sqrt(re * re + im * im) / static_cast<double>(samples.size());
}

}  // namespace l3::audio
