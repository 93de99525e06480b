#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "l3/audio.hpp"

// Minimal RIFF/WAVE reader and writer. Reads PCM 16-bit little-endian, mono
// or stereo (downmixed by averaging); unknown chunks are skipped. Writes
// PCM 16-bit mono.

namespace l3::audio {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error("wav: " + path + ": " + why);
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12) fail(path, "truncated header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(path, "not a RIFF/WAVE file");

  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t len = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + len > bytes.size()) fail(path, "chunk overruns file");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) fail(path, "fmt chunk too short");
      format = read_u16(bytes.data() + pos);
      channels = read_u16(bytes.data() + pos + 2);
      rate = read_u32(bytes.data() + pos + 4);
      bits = read_u16(bytes.data() + pos + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_len = len;
    }
    pos += len + (len & 1);  // chunks are word-aligned
  }

  if (format != 1) fail(path, "unsupported format tag " + std::to_string(format) +
                              " (only PCM is supported)");
  if (bits != 16) fail(path, "unsupported bit depth " + std::to_string(bits));
  if (channels != 1 && channels != 2)
    fail(path, "unsupported channel count " + std::to_string(channels));
  if (rate == 0) fail(path, "missing or invalid sample rate");
  if (!data) fail(path, "missing data chunk");

  const std::size_t frames = data_len / (2 * channels);
  if (frames == 0) fail(path, "empty data chunk");
  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  buf.samples.resize(frames);
  constexpr float kScale = 1.f / 32768.f;
  for (std::size_t i = 0; i < frames; ++i) {
    if (channels == 1) {
      const auto s = static_cast<std::int16_t>(read_u16(data + 2 * i));
      buf.samples[i] = static_cast<float>(s) * kScale;
    } else {
      const auto l = static_cast<std::int16_t>(read_u16(data + 4 * i));
      const auto r = static_cast<std::int16_t>(read_u16(data + 4 * i + 2));
      buf.samples[i] = (static_cast<float>(l) + static_cast<float>(r)) * 0.5f * kScale;
    }
  }
  return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buf) {
  if (buf.samples.empty() || buf.sample_rate <= 0)
    throw std::invalid_argument("write_wav: empty buffer or invalid rate");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");

  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    f.write(reinterpret_cast<char*>(b), 2);
  };

  const std::uint32_t data_len = static_cast<std::uint32_t>(buf.samples.size() * 2);
  f.write("RIFF", 4);
  put_u32(36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<std::uint32_t>(buf.sample_rate));
  put_u32(static_cast<std::uint32_t>(buf.sample_rate) * 2);
  put_u16(2);
  put_u16(16);
  f.write("data", 4);
  put_u32(data_len);
  for (float v : buf.samples) {
    const float c = std::min(1.f, std::max(-1.f, v));
    const long q = std::lround(c * 32768.f);
    const auto s = static_cast<std::int16_t>(std::min(32767L, std::max(-32768L, q)));
    put_u16(static_cast<std::uint16_t>(s));
  }
  if (!f) fail(path, "write failed");
}

}  // namespace l3::audio
