#include "l3/nnops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

// Parallelization rule used throughout this file: a thread owns whole output
// elements and reduces them in a fixed order, so results are identical for
// any thread count. Reductions that need speed use fixed 8-lane partial sums
// instead of omp reductions.

namespace l3::nn {

namespace {

// Upper bound on W for the kernel-gradient lane buffers; covers 256x256
// transfer inputs with headroom.
constexpr int kMaxRowWidth = 512;

void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void axpy(float a, const float* x, float* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

// Dot product with 8 independent accumulators; fixed summation order.
inline float dot8(const float* a, const float* b, int n) {
  float s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

inline float sum8(const float* a, std::size_t n) {
  float s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
    s4 += a[i + 4];
    s5 += a[i + 5];
    s6 += a[i + 6];
    s7 += a[i + 7];
  }
  for (; i < n; ++i) s0 += a[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

inline float sumsq_centered8(const float* a, std::size_t n, float mu) {
  float s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    float d0 = a[i] - mu, d1 = a[i + 1] - mu, d2 = a[i + 2] - mu, d3 = a[i + 3] - mu;
    float d4 = a[i + 4] - mu, d5 = a[i + 5] - mu, d6 = a[i + 6] - mu, d7 = a[i + 7] - mu;
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
    s4 += d4 * d4;
    s5 += d5 * d5;
    s6 += d6 * d6;
    s7 += d7 * d7;
  }
  for (; i < n; ++i) {
    float d = a[i] - mu;
    s0 += d * d;
  }
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

void check_conv_args(const Tensor& input, const Tensor& kernel, const Tensor* bias) {
  check(input.ndim() == 4, "conv2d: input must be N×C×H×W, got " +
                               Tensor::shape_str(input.shape()));
  check(kernel.ndim() == 4 && kernel.dim(2) == 3 && kernel.dim(3) == 3,
        "conv2d: kernel must be K×C×3×3, got " + Tensor::shape_str(kernel.shape()));
  check(kernel.dim(1) == input.dim(1),
        "conv2d: kernel channels " + std::to_string(kernel.dim(1)) +
            " do not match input channels " + std::to_string(input.dim(1)));
  if (bias)
    check(bias->ndim() == 1 && bias->dim(0) == kernel.dim(0),
          "conv2d: bias length must equal output channel count");
}

// Zero-pad every H×W plane by one pixel so the 3x3 stencils below run
// branch-free over full rows.
std::vector<float> pad_planes(const float* src, int planes, int H, int W) {
  const int Hp = H + 2, Wp = W + 2;
  std::vector<float> padded(static_cast<std::size_t>(planes) * Hp * Wp, 0.f);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const float* sp = src + static_cast<std::size_t>(p) * H * W;
    float* dp = padded.data() + static_cast<std::size_t>(p) * Hp * Wp;
    for (int h = 0; h < H; ++h)
      std::memcpy(dp + static_cast<std::size_t>(h + 1) * Wp + 1,
                  sp + static_cast<std::size_t>(h) * W, sizeof(float) * W);
  }
  return padded;
}

// out[oh][ow] += sum_{dy,dx} w[dy*3+dx] * padded[oh+dy][ow+dx]
inline void stencil9_accum(const float* padded, int Wp, const float* w, float* out,
                           int H, int W) {
  const float w0 = w[0], w1 = w[1], w2 = w[2], w3 = w[3], w4 = w[4], w5 = w[5],
              w6 = w[6], w7 = w[7], w8 = w[8];
  for (int oh = 0; oh < H; ++oh) {
    const float* r0 = padded + static_cast<std::size_t>(oh) * Wp;
    const float* r1 = r0 + Wp;
    const float* r2 = r1 + Wp;
    float* orow = out + static_cast<std::size_t>(oh) * W;
    for (int ow = 0; ow < W; ++ow) {
      orow[ow] += w0 * r0[ow] + w1 * r0[ow + 1] + w2 * r0[ow + 2] + w3 * r1[ow] +
                  w4 * r1[ow + 1] + w5 * r1[ow + 2] + w6 * r2[ow] + w7 * r2[ow + 1] +
                  w8 * r2[ow + 2];
    }
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  check_conv_args(input, kernel, &bias);
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int K = kernel.dim(0);
  const int Wp = W + 2, Hp = H + 2;
  Tensor out({N, K, H, W});
  const std::vector<float> padded = pad_planes(input.data(), N * C, H, W);
  const float* ker = kernel.data();
  const float* b = bias.data();
  float* o = out.data();
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const std::size_t pplane = static_cast<std::size_t>(Hp) * Wp;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      float* op = o + (static_cast<std::size_t>(n) * K + k) * plane;
      std::fill(op, op + plane, b[k]);
      for (int c = 0; c < C; ++c) {
        const float* pp = padded.data() + (static_cast<std::size_t>(n) * C + c) * pplane;
        const float* w = ker + (static_cast<std::size_t>(k) * C + c) * 9;
        stencil9_accum(pp, Wp, w, op, H, W);
      }
    }
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            const Tensor& output_grad, bool want_input_grad) {
  check_conv_args(input, kernel, nullptr);
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int K = kernel.dim(0);
  check(output_grad.shape() == std::vector<int>({N, K, H, W}),
        "conv2d backward: output_grad shape mismatch");
  const int Wp = W + 2, Hp = H + 2;
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const std::size_t pplane = static_cast<std::size_t>(Hp) * Wp;

  Conv2dGrads g{Tensor(), Tensor({K, C, 3, 3}), Tensor({K})};
  const float* ker = kernel.data();
  const float* go = output_grad.data();
  const std::vector<float> padded_go = pad_planes(go, N * K, H, W);

  // input gradient: same stencil with the spatially flipped kernel
  if (want_input_grad) {
    g.input = Tensor({N, C, H, W});
    float* gi = g.input.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        float* gip = gi + (static_cast<std::size_t>(n) * C + c) * plane;
        for (int k = 0; k < K; ++k) {
          const float* pg =
              padded_go.data() + (static_cast<std::size_t>(n) * K + k) * pplane;
          const float* w = ker + (static_cast<std::size_t>(k) * C + c) * 9;
          const float wf[9] = {w[8], w[7], w[6], w[5], w[4], w[3], w[2], w[1], w[0]};
          stencil9_accum(pg, Wp, wf, gip, H, W);
        }
      }
    }
  }

  // kernel gradient; padded input makes the shifted ranges uniform. All nine
  // taps accumulate into per-lane arrays in one pass per row, reduced once at
  // the end, which vectorizes far better than per-row dot products.
  check(W <= kMaxRowWidth, "conv2d backward: row width exceeds kernel-grad lane buffer");
  const std::vector<float> padded_in = pad_planes(input.data(), N * C, H, W);
  float* gk = g.kernel.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) {
      float acc[9][kMaxRowWidth];
      for (auto& lane : acc) std::fill(lane, lane + W, 0.f);
      for (int n = 0; n < N; ++n) {
        const float* gop = go + (static_cast<std::size_t>(n) * K + k) * plane;
        const float* pp =
            padded_in.data() + (static_cast<std::size_t>(n) * C + c) * pplane;
        for (int oh = 0; oh < H; ++oh) {
          const float* grow = gop + static_cast<std::size_t>(oh) * W;
          const float* p0 = pp + static_cast<std::size_t>(oh) * Wp;
          const float* p1 = p0 + Wp;
          const float* p2 = p1 + Wp;
          for (int l = 0; l < W; ++l) {
            const float gl = grow[l];
            acc[0][l] += gl * p0[l];
            acc[1][l] += gl * p0[l + 1];
            acc[2][l] += gl * p0[l + 2];
            acc[3][l] += gl * p1[l];
            acc[4][l] += gl * p1[l + 1];
            acc[5][l] += gl * p1[l + 2];
            acc[6][l] += gl * p2[l];
            acc[7][l] += gl * p2[l + 1];
            acc[8][l] += gl * p2[l + 2];
          }
        }
      }
      float* dst = gk + (static_cast<std::size_t>(k) * C + c) * 9;
      for (int j = 0; j < 9; ++j) dst[j] = sum8(acc[j], static_cast<std::size_t>(W));
    }
  }

  // bias gradient
  float* gb = g.bias.data();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < K; ++k) {
    float acc = 0.f;
    for (int n = 0; n < N; ++n)
      acc += sum8(go + (static_cast<std::size_t>(n) * K + k) * plane, plane);
    gb[k] = acc;
  }
  return g;
}

Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         Mode mode, Tensor& running_mean, Tensor& running_var,
                         BatchNormCache* cache, float eps, float momentum) {
  check(input.ndim() == 4, "batchnorm: input must be N×C×H×W");
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  check(gamma.size() == static_cast<std::size_t>(C) && beta.size() == gamma.size(),
        "batchnorm: gamma/beta must have one entry per channel");
  check(running_mean.size() == static_cast<std::size_t>(C) &&
            running_var.size() == static_cast<std::size_t>(C),
        "batchnorm: running stats must have one entry per channel");
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const std::size_t m = static_cast<std::size_t>(N) * plane;

  std::vector<float> mean(C), inv_std(C);
  if (mode == Mode::kTrain) {
    check(m >= 2, "batchnorm: train mode needs at least 2 elements per channel");
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
      float s = 0.f;
      for (int n = 0; n < N; ++n)
        s += sum8(input.data() + (static_cast<std::size_t>(n) * C + c) * plane, plane);
      const float mu = s / static_cast<float>(m);
      float ss = 0.f;
      for (int n = 0; n < N; ++n)
        ss += sumsq_centered8(input.data() + (static_cast<std::size_t>(n) * C + c) * plane,
                              plane, mu);
      const float var = ss / static_cast<float>(m);
      mean[c] = mu;
      inv_std[c] = 1.f / std::sqrt(var + eps);
      running_mean[c] = momentum * running_mean[c] + (1.f - momentum) * mu;
      const float var_unbiased = var * static_cast<float>(m) / static_cast<float>(m - 1);
      running_var[c] = momentum * running_var[c] + (1.f - momentum) * var_unbiased;
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = running_mean[c];
      inv_std[c] = 1.f / std::sqrt(running_var[c] + eps);
    }
  }

  Tensor out({N, C, H, W});
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const std::size_t off = (static_cast<std::size_t>(n) * C + c) * plane;
      const float* ip = input.data() + off;
      float* op = out.data() + off;
      const float scale = gamma[c] * inv_std[c];
      const float shift = beta[c] - mean[c] * scale;
      for (std::size_t i = 0; i < plane; ++i) op[i] = ip[i] * scale + shift;
    }
  }
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
  check(output_grad.same_shape(input), "batchnorm backward: grad shape mismatch");
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const float m = static_cast<float>(static_cast<std::size_t>(N) * plane);

  BatchNormGrads g{Tensor({N, C, H, W}), Tensor({C}), Tensor({C})};
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c) {
    const float mu = cache.mean[c], is = cache.inv_std[c];
    // s1 = sum(dy), s2 = sum(dy * x_hat)
    float s1 = 0.f, s2 = 0.f;
    for (int n = 0; n < N; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * C + c) * plane;
      const float* dy = output_grad.data() + off;
      const float* x = input.data() + off;
      float a0 = 0, a1 = 0, b0 = 0, b1 = 0;
      std::size_t i = 0;
      for (; i + 2 <= plane; i += 2) {
        a0 += dy[i];
        a1 += dy[i + 1];
        b0 += dy[i] * (x[i] - mu) * is;
        b1 += dy[i + 1] * (x[i + 1] - mu) * is;
      }
      for (; i < plane; ++i) {
        a0 += dy[i];
        b0 += dy[i] * (x[i] - mu) * is;
      }
      s1 += a0 + a1;
      s2 += b0 + b1;
    }
    g.gamma[c] = s2;
    g.beta[c] = s1;
    const float scale = gamma[c] * is;
    const float c1 = s1 / m, c2 = s2 / m;
    for (int n = 0; n < N; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * C + c) * plane;
      const float* dy = output_grad.data() + off;
      const float* x = input.data() + off;
      float* dx = g.input.data() + off;
      for (std::size_t i = 0; i < plane; ++i) {
        const float xh = (x[i] - mu) * is;
        dx[i] = scale * (dy[i] - c1 - xh * c2);
      }
    }
  }
  return g;
}

BatchNormGrads batchnorm_backward_eval(const Tensor& input, const Tensor& gamma,
                                       const Tensor& running_mean,
                                       const Tensor& running_var,
                                       const Tensor& output_grad, float eps) {
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  BatchNormGrads g{Tensor({N, C, H, W}), Tensor({C}), Tensor({C})};
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c) {
    const float mu = running_mean[c];
    const float is = 1.f / std::sqrt(running_var[c] + eps);
    float s1 = 0.f, s2 = 0.f;
    for (int n = 0; n < N; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * C + c) * plane;
      const float* dy = output_grad.data() + off;
      const float* x = input.data() + off;
      float* dx = g.input.data() + off;
      const float scale = gamma[c] * is;
      for (std::size_t i = 0; i < plane; ++i) {
        s1 += dy[i];
        s2 += dy[i] * (x[i] - mu) * is;
        dx[i] = scale * dy[i];
      }
    }
    g.gamma[c] = s2;
    g.beta[c] = s1;
  }
  return g;
}

MaxPool2dOut maxpool2d_forward(const Tensor& input, int kernel) {
  check(input.ndim() == 4, "maxpool2d: input must be N×C×H×W");
  check(kernel >= 1, "maxpool2d: kernel must be >= 1");
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int OH = H / kernel, OW = W / kernel;
  check(OH >= 1 && OW >= 1, "maxpool2d: kernel " + std::to_string(kernel) +
                                " exceeds spatial extent " + std::to_string(H) + "x" +
                                std::to_string(W));
  MaxPool2dOut r{Tensor({N, C, OH, OW}), std::vector<std::int32_t>()};
  r.argmax.resize(r.output.size());
  const std::size_t iplane = static_cast<std::size_t>(H) * W;
  const std::size_t oplane = static_cast<std::size_t>(OH) * OW;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const std::size_t ioff = (static_cast<std::size_t>(n) * C + c) * iplane;
      const std::size_t ooff = (static_cast<std::size_t>(n) * C + c) * oplane;
      const float* ip = input.data() + ioff;
      for (int oh = 0; oh < OH; ++oh) {
        for (int ow = 0; ow < OW; ++ow) {
          float best = -std::numeric_limits<float>::infinity();
          std::size_t best_idx = 0;
          for (int dy = 0; dy < kernel; ++dy) {
            const std::size_t row = static_cast<std::size_t>(oh * kernel + dy) * W;
            for (int dx = 0; dx < kernel; ++dx) {
              const std::size_t idx = row + static_cast<std::size_t>(ow * kernel + dx);
              if (ip[idx] > best) {
                best = ip[idx];
                best_idx = idx;
              }
            }
          }
          const std::size_t o = ooff + static_cast<std::size_t>(oh) * OW + ow;
          r.output[o] = best;
          r.argmax[o] = static_cast<std::int32_t>(ioff + best_idx);
        }
      }
    }
  }
  return r;
}

MaxPool2dOut global_maxpool_forward(const Tensor& input) {
  check(input.ndim() == 4, "global_maxpool: input must be N×C×H×W");
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  MaxPool2dOut r{Tensor({N, C}), std::vector<std::int32_t>()};
  r.argmax.resize(r.output.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const std::size_t off = (static_cast<std::size_t>(n) * C + c) * plane;
      const float* ip = input.data() + off;
      float best = ip[0];
      std::size_t best_idx = 0;
      for (std::size_t i = 1; i < plane; ++i) {
        if (ip[i] > best) {
          best = ip[i];
          best_idx = i;
        }
      }
      const std::size_t o = static_cast<std::size_t>(n) * C + c;
      r.output[o] = best;
      r.argmax[o] = static_cast<std::int32_t>(off + best_idx);
    }
  }
  return r;
}

Tensor maxpool_backward(const std::vector<std::int32_t>& argmax, const Tensor& output_grad,
                        const std::vector<int>& input_shape) {
  check(argmax.size() == output_grad.size(), "maxpool backward: argmax length mismatch");
  Tensor g(input_shape);
  float* gp = g.data();
  const float* go = output_grad.data();
  for (std::size_t i = 0; i < argmax.size(); ++i)
    gp[static_cast<std::size_t>(argmax[i])] += go[i];
  return g;
}

Tensor fully_connected_forward(const Tensor& input, const Tensor& weights,
                               const Tensor& bias) {
  check(input.ndim() == 2 && weights.ndim() == 2, "fully_connected: input N×D, weights D×M");
  const int N = input.dim(0), D = input.dim(1), M = weights.dim(1);
  check(weights.dim(0) == D, "fully_connected: inner dimensions disagree (" +
                                 std::to_string(D) + " vs " + std::to_string(weights.dim(0)) + ")");
  check(bias.size() == static_cast<std::size_t>(M), "fully_connected: bias length mismatch");
  Tensor out({N, M});
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    float* orow = out.data() + static_cast<std::size_t>(n) * M;
    std::memcpy(orow, bias.data(), sizeof(float) * static_cast<std::size_t>(M));
    const float* irow = input.data() + static_cast<std::size_t>(n) * D;
    for (int d = 0; d < D; ++d)
      axpy(irow[d], weights.data() + static_cast<std::size_t>(d) * M, orow, M);
  }
  return out;
}

FullyConnectedGrads fully_connected_backward(const Tensor& input, const Tensor& weights,
                                             const Tensor& output_grad) {
  const int N = input.dim(0), D = input.dim(1), M = weights.dim(1);
  check(output_grad.shape() == std::vector<int>({N, M}),
        "fully_connected backward: output_grad shape mismatch");
  FullyConnectedGrads g{Tensor({N, D}), Tensor({D, M}), Tensor({M})};

#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    const float* grow = output_grad.data() + static_cast<std::size_t>(n) * M;
    float* girow = g.input.data() + static_cast<std::size_t>(n) * D;
    for (int d = 0; d < D; ++d)
      girow[d] = dot8(grow, weights.data() + static_cast<std::size_t>(d) * M, M);
  }

#pragma omp parallel for schedule(static)
  for (int d = 0; d < D; ++d) {
    float* gwrow = g.weights.data() + static_cast<std::size_t>(d) * M;
    for (int n = 0; n < N; ++n)
      axpy(input[static_cast<std::size_t>(n) * D + d],
           output_grad.data() + static_cast<std::size_t>(n) * M, gwrow, M);
  }

  for (int n = 0; n < N; ++n)
    axpy(1.f, output_grad.data() + static_cast<std::size_t>(n) * M, g.bias.data(), M);
  return g;
}

Tensor relu_forward(const Tensor& input) {
  Tensor out(input.shape());
  const float* ip = input.data();
  float* op = out.data();
  const std::size_t n = input.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    op[i] = ip[i] > 0.f ? ip[i] : 0.f;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& output_grad) {
  check(input.same_shape(output_grad), "relu backward: shape mismatch");
  Tensor g(input.shape());
  const float* ip = input.data();
  const float* go = output_grad.data();
  float* gp = g.data();
  const std::size_t n = input.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    gp[i] = ip[i] > 0.f ? go[i] : 0.f;
  return g;
}

Tensor softmax(const Tensor& logits) {
  check(logits.ndim() == 2, "softmax: logits must be N×K");
  const int N = logits.dim(0), K = logits.dim(1);
  Tensor out({N, K});
  for (int n = 0; n < N; ++n) {
    const float* row = logits.data() + static_cast<std::size_t>(n) * K;
    float* orow = out.data() + static_cast<std::size_t>(n) * K;
    float mx = row[0];
    for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
    double denom = 0.0;
    for (int k = 0; k < K; ++k) {
      orow[k] = std::exp(row[k] - mx);
      denom += orow[k];
    }
    const float inv = static_cast<float>(1.0 / denom);
    for (int k = 0; k < K; ++k) orow[k] *= inv;
  }
  return out;
}

SoftmaxXentOut softmax_cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
  check(logits.ndim() == 2, "softmax_cross_entropy: logits must be N×K");
  const int N = logits.dim(0), K = logits.dim(1);
  check(targets.size() == static_cast<std::size_t>(N),
        "softmax_cross_entropy: one target per row required");
  for (int t : targets)
    check(t >= 0 && t < K, "softmax_cross_entropy: target " + std::to_string(t) +
                               " out of range [0, " + std::to_string(K) + ")");
  SoftmaxXentOut r{0.f, softmax(logits)};
  double loss = 0.0;
  const float inv_n = 1.f / static_cast<float>(N);
  for (int n = 0; n < N; ++n) {
    float* grow = r.logits_grad.data() + static_cast<std::size_t>(n) * K;
    const float p = std::max(grow[targets[n]], 1e-30f);
    loss -= std::log(static_cast<double>(p));
    for (int k = 0; k < K; ++k) grow[k] *= inv_n;
    grow[targets[n]] -= inv_n;
  }
  r.loss = static_cast<float>(loss / N);
  return r;
}

void adam_update(std::size_t n, float* param, const float* grad, float* m, float* v,
                 std::int64_t t, const AdamConfig& cfg) {
  if (t < 1) throw std::invalid_argument("adam_update: step counter must be >= 1");
  const float bc1 = 1.f - static_cast<float>(std::pow(static_cast<double>(cfg.beta1), t));
  const float bc2 = 1.f - static_cast<float>(std::pow(static_cast<double>(cfg.beta2), t));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const float g = grad[i] + cfg.weight_decay * param[i];
    m[i] = cfg.beta1 * m[i] + (1.f - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.f - cfg.beta2) * g * g;
    const float mhat = m[i] / bc1;
    const float vhat = v[i] / bc2;
    param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace l3::nn
