#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "l3/nnops.hpp"

// Naive single-threaded implementations of the hot kernels. These stay as
// the ground truth the OpenMP kernels are checked against, and as the
// baseline for the bench tool.

namespace l3::nn::ref {

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int K = kernel.dim(0);
  if (kernel.dim(1) != C || kernel.dim(2) != 3 || kernel.dim(3) != 3)
    throw std::invalid_argument("ref conv2d: kernel must be K×C×3×3 with matching channels");
  Tensor out({N, K, H, W});
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      for (int oh = 0; oh < H; ++oh)
        for (int ow = 0; ow < W; ++ow) {
          float acc = bias[k];
          for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int ih = oh + ky - 1, iw = ow + kx - 1;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                acc += kernel.at(k, c, ky, kx) * input.at(n, c, ih, iw);
              }
          out.at(n, k, oh, ow) = acc;
        }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            const Tensor& output_grad) {
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int K = kernel.dim(0);
  Conv2dGrads g{Tensor({N, C, H, W}), Tensor({K, C, 3, 3}), Tensor({K})};
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      for (int oh = 0; oh < H; ++oh)
        for (int ow = 0; ow < W; ++ow) {
          const float go = output_grad.at(n, k, oh, ow);
          g.bias[k] += go;
          for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int ih = oh + ky - 1, iw = ow + kx - 1;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                g.kernel.at(k, c, ky, kx) += go * input.at(n, c, ih, iw);
                g.input.at(n, c, ih, iw) += go * kernel.at(k, c, ky, kx);
              }
        }
  return g;
}

Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         Mode mode, Tensor& running_mean, Tensor& running_var,
                         BatchNormCache* cache, float eps, float momentum) {
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t m = static_cast<std::size_t>(N) * H * W;
  std::vector<float> mean(C), inv_std(C);
  if (mode == Mode::kTrain) {
    if (m < 2)
      throw std::invalid_argument("ref batchnorm: train mode needs >= 2 elements per channel");
    for (int c = 0; c < C; ++c) {
      float s = 0.f;
      for (int n = 0; n < N; ++n)
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) s += input.at(n, c, h, w);
      const float mu = s / static_cast<float>(m);
      float ss = 0.f;
      for (int n = 0; n < N; ++n)
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) {
            const float d = input.at(n, c, h, w) - mu;
            ss += d * d;
          }
      const float var = ss / static_cast<float>(m);
      mean[c] = mu;
      inv_std[c] = 1.f / std::sqrt(var + eps);
      running_mean[c] = momentum * running_mean[c] + (1.f - momentum) * mu;
      running_var[c] = momentum * running_var[c] +
                       (1.f - momentum) * var * static_cast<float>(m) / static_cast<float>(m - 1);
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = running_mean[c];
      inv_std[c] = 1.f / std::sqrt(running_var[c] + eps);
    }
  }
  Tensor out({N, C, H, W});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
          out.at(n, c, h, w) =
              gamma[c] * (input.at(n, c, h, w) - mean[c]) * inv_std[c] + beta[c];
  if (cache) {
    cache->mean = std::move(mean);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

BatchNormGrads batchnorm_backward(const Tensor& input, const Tensor& gamma,
                                  const BatchNormCache& cache,
                                  const Tensor& output_grad) {
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const float m = static_cast<float>(static_cast<std::size_t>(N) * H * W);
  BatchNormGrads g{Tensor({N, C, H, W}), Tensor({C}), Tensor({C})};
  for (int c = 0; c < C; ++c) {
    float s1 = 0.f, s2 = 0.f;
    for (int n = 0; n < N; ++n)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          const float dy = output_grad.at(n, c, h, w);
          s1 += dy;
          s2 += dy * (input.at(n, c, h, w) - cache.mean[c]) * cache.inv_std[c];
        }
    g.gamma[c] = s2;
    g.beta[c] = s1;
    for (int n = 0; n < N; ++n)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          const float xh = (input.at(n, c, h, w) - cache.mean[c]) * cache.inv_std[c];
          g.input.at(n, c, h, w) = gamma[c] * cache.inv_std[c] *
                                   (output_grad.at(n, c, h, w) - s1 / m - xh * s2 / m);
        }
  }
  return g;
}

MaxPool2dOut maxpool2d_forward(const Tensor& input, int kernel) {
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int OH = H / kernel, OW = W / kernel;
  if (OH < 1 || OW < 1) throw std::invalid_argument("ref maxpool2d: kernel too large");
  MaxPool2dOut r{Tensor({N, C, OH, OW}), {}};
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow, ++o) {
          float best = -std::numeric_limits<float>::infinity();
          std::size_t best_idx = 0;
          for (int dy = 0; dy < kernel; ++dy)
            for (int dx = 0; dx < kernel; ++dx) {
              const std::size_t idx =
                  ((static_cast<std::size_t>(n) * C + c) * H + oh * kernel + dy) * W +
                  ow * kernel + dx;
              if (input[idx] > best) {
                best = input[idx];
                best_idx = idx;
              }
            }
          r.output[o] = best;
          r.argmax[o] = static_cast<std::int32_t>(best_idx);
        }
  return r;
}

Tensor fully_connected_forward(const Tensor& input, const Tensor& weights,
                               const Tensor& bias) {
  const int N = input.dim(0), D = input.dim(1), M = weights.dim(1);
  if (weights.dim(0) != D) throw std::invalid_argument("ref fc: inner dimensions disagree");
  Tensor out({N, M});
  for (int n = 0; n < N; ++n)
    for (int mcol = 0; mcol < M; ++mcol) {
      float acc = bias[mcol];
      for (int d = 0; d < D; ++d) acc += input.at(n, d) * weights.at(d, mcol);
      out.at(n, mcol) = acc;
    }
  return out;
}

FullyConnectedGrads fully_connected_backward(const Tensor& input, const Tensor& weights,
                                             const Tensor& output_grad) {
  const int N = input.dim(0), D = input.dim(1), M = weights.dim(1);
  FullyConnectedGrads g{Tensor({N, D}), Tensor({D, M}), Tensor({M})};
  for (int n = 0; n < N; ++n)
    for (int mcol = 0; mcol < M; ++mcol) {
      const float go = output_grad.at(n, mcol);
      g.bias[mcol] += go;
      for (int d = 0; d < D; ++d) {
        g.input.at(n, d) += go * weights.at(d, mcol);
        g.weights.at(d, mcol) += go * input.at(n, d);
      }
    }
  return g;
}

}  // namespace l3::nn::ref
