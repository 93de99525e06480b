#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "l3/image.hpp"

namespace l3::img {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error("ppm: " + path + ": " + why);
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

Tensor read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  if (next_token(f) != "P6") fail(path, "not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(f));
    h = std::stoi(next_token(f));
    maxval = std::stoi(next_token(f));
  } catch (const std::exception&) {
    fail(path, "malformed header");
  }
  if (w <= 0 || h <= 0) fail(path, "invalid dimensions");
  if (maxval != 255) fail(path, "unsupported maxval " + std::to_string(maxval));

  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (f.gcount() != static_cast<std::streamsize>(raw.size())) fail(path, "truncated pixel data");

  Tensor image({3, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      image[static_cast<std::size_t>(c) * plane + i] = raw[i * 3 + c] / 255.f;
  return image;
}

void write_ppm(const std::string& path, const Tensor& image) {
  if (image.ndim() != 3 || image.dim(0) != 3)
    throw std::invalid_argument("write_ppm: image must be [3, H, W]");
  const int h = image.dim(1), w = image.dim(2);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");
  f << "P6\n" << w << " " << h << "\n255\n";
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<unsigned char> raw(plane * 3);
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c) {
      const float v = image[static_cast<std::size_t>(c) * plane + i];
      const float cl = std::min(1.f, std::max(0.f, v));
      raw[i * 3 + c] = static_cast<unsigned char>(std::lround(cl * 255.f));
    }
  f.write(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!f) fail(path, "write failed");
}

void write_pgm_normalized(const std::string& path, const Tensor& map) {
  if (map.ndim() != 2) throw std::invalid_argument("write_pgm: map must be [H, W]");
  const int h = map.dim(0), w = map.dim(1);
  float lo = map[0], hi = map[0];
  for (std::size_t i = 1; i < map.size(); ++i) {
    lo = std::min(lo, map[i]);
    hi = std::max(hi, map[i]);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");
  char comment[64];
  std::snprintf(comment, sizeof(comment), "# max %.9g\n", static_cast<double>(hi));
  f << "P5\n" << comment << w << " " << h << "\n255\n";
  const float range = hi - lo;
  std::vector<unsigned char> raw(map.size());
  for (std::size_t i = 0; i < map.size(); ++i)
    raw[i] = range > 0.f
                 ? static_cast<unsigned char>(std::lround((map[i] - lo) / range * 255.f))
                 : 0;
  f.write(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!f) fail(path, "write failed");
}

}  // namespace l3::img
