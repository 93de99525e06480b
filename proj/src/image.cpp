#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "l3/image.hpp"

namespace l3::img {

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w) {
  if (image.ndim() != 3) throw std::invalid_argument("resize: image must be [C, H, W]");
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize: degenerate target size");
  const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
  Tensor out({C, out_h, out_w});
  const float sy = static_cast<float>(H) / out_h;
  const float sx = static_cast<float>(W) / out_w;
  for (int c = 0; c < C; ++c) {
    const float* ip = image.data() + static_cast<std::size_t>(c) * H * W;
    float* op = out.data() + static_cast<std::size_t>(c) * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      const float fy = std::max(0.f, (y + 0.5f) * sy - 0.5f);
      const int y0 = std::min(static_cast<int>(fy), H - 1);
      const int y1 = std::min(y0 + 1, H - 1);
      const float wy = fy - y0;
      for (int x = 0; x < out_w; ++x) {
        const float fx = std::max(0.f, (x + 0.5f) * sx - 0.5f);
        const int x0 = std::min(static_cast<int>(fx), W - 1);
        const int x1 = std::min(x0 + 1, W - 1);
        const float wx = fx - x0;
        const float a = ip[static_cast<std::size_t>(y0) * W + x0];
        const float b = ip[static_cast<std::size_t>(y0) * W + x1];
        const float d = ip[static_cast<std::size_t>(y1) * W + x0];
        const float e = ip[static_cast<std::size_t>(y1) * W + x1];
        op[static_cast<std::size_t>(y) * out_w + x] =
            a * (1 - wy) * (1 - wx) + b * (1 - wy) * wx + d * wy * (1 - wx) + e * wy * wx;
      }
    }
  }
  return out;
}

Tensor scale_shortest_side(const Tensor& image, int target) {
  const int H = image.dim(1), W = image.dim(2);
  if (H < 1 || W < 1) throw std::invalid_argument("scale: degenerate image");
  int out_h, out_w;
  if (H <= W) {
    out_h = target;
    out_w = static_cast<int>(std::lround(static_cast<double>(W) * target / H));
  } else {
    out_w = target;
    out_h = static_cast<int>(std::lround(static_cast<double>(H) * target / W));
  }
  return resize_bilinear(image, out_h, out_w);
}

Tensor crop(const Tensor& image, int top, int left, int h, int w) {
  const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
  if (top < 0 || left < 0 || top + h > H || left + w > W)
    throw std::invalid_argument("crop: window outside image");
  Tensor out({C, h, w});
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < h; ++y) {
      const float* src =
          image.data() + (static_cast<std::size_t>(c) * H + top + y) * W + left;
      float* dst = out.data() + (static_cast<std::size_t>(c) * h + y) * w;
      std::copy(src, src + w, dst);
    }
  return out;
}

Tensor hflip(const Tensor& image) {
  const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
  Tensor out({C, H, W});
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y) {
      const float* src = image.data() + (static_cast<std::size_t>(c) * H + y) * W;
      float* dst = out.data() + (static_cast<std::size_t>(c) * H + y) * W;
      for (int x = 0; x < W; ++x) dst[x] = src[W - 1 - x];
    }
  return out;
}

}  // namespace l3::img
