#pragma once

#include <cstdint>
#include <vector>

#include "l3/tensor.hpp"

namespace l3::nn {

enum class Mode { kTrain, kEval };

// ---------------------------------------------------------------------------
// conv2d: 3x3 kernels, stride 1, zero padding 1 (spatial size preserved).
// input N×C×H×W, kernel K×C×3×3, bias K -> N×K×H×W.
// ---------------------------------------------------------------------------
Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias);

struct Conv2dGrads {
  Tensor input, kernel, bias;
};
// want_input_grad=false skips the input gradient (left empty); used for the
// first layer of each trunk where no upstream gradient is needed.
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            const Tensor& output_grad, bool want_input_grad = true);

// ---------------------------------------------------------------------------
// batchnorm over (N,H,W) per channel. Train mode normalizes with batch
// statistics (population variance) and folds them into the running stats by
// exponential moving average; the running variance keeps the unbiased
// estimate. Eval mode normalizes with the running stats.
// ---------------------------------------------------------------------------
struct BatchNormCache {
  std::vector<float> mean, inv_std;
};

Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         Mode mode, Tensor& running_mean, Tensor& running_var,
                         BatchNormCache* cache, float eps = 1e-5f,
                         float momentum = 0.99f);

struct BatchNormGrads {
  Tensor input, gamma, beta;
};
BatchNormGrads batchnorm_backward(const Tensor& input, const Tensor& gamma,
                                  const BatchNormCache& cache,
                                  const Tensor& output_grad);
BatchNormGrads batchnorm_backward_eval(const Tensor& input, const Tensor& gamma,
                                       const Tensor& running_mean,
                                       const Tensor& running_var,
                                       const Tensor& output_grad, float eps = 1e-5f);

// ---------------------------------------------------------------------------
// max pooling with kernel = stride and no padding; trailing remainder rows
// and columns are discarded (floor semantics). argmax stores the flat index
// into the input tensor per output element; ties resolve to the first
// maximal index in row-major scan order so gradients are reproducible.
// ---------------------------------------------------------------------------
struct MaxPool2dOut {
  Tensor output;
  std::vector<std::int32_t> argmax;
};
MaxPool2dOut maxpool2d_forward(const Tensor& input, int kernel);
MaxPool2dOut global_maxpool_forward(const Tensor& input);  // N×C×H×W -> N×C
Tensor maxpool_backward(const std::vector<std::int32_t>& argmax,
                        const Tensor& output_grad,
                        const std::vector<int>& input_shape);

// ---------------------------------------------------------------------------
// fully connected: input N×D, weights D×M, bias M -> N×M.
// ---------------------------------------------------------------------------
Tensor fully_connected_forward(const Tensor& input, const Tensor& weights,
                               const Tensor& bias);
struct FullyConnectedGrads {
  Tensor input, weights, bias;
};
FullyConnectedGrads fully_connected_backward(const Tensor& input, const Tensor& weights,
                                             const Tensor& output_grad);

// ---------------------------------------------------------------------------
// relu
// ---------------------------------------------------------------------------
Tensor relu_forward(const Tensor& input);
Tensor relu_backward(const Tensor& input, const Tensor& output_grad);

// ---------------------------------------------------------------------------
// softmax cross entropy: mean over the batch of -log softmax(logits)[target].
// Gradient is (softmax - onehot)/N. Stabilized by row-max subtraction.
// ---------------------------------------------------------------------------
struct SoftmaxXentOut {
  float loss;
  Tensor logits_grad;
};
SoftmaxXentOut softmax_cross_entropy(const Tensor& logits, const std::vector<int>& targets);
Tensor softmax(const Tensor& logits);  // row-wise

// ---------------------------------------------------------------------------
// Adam with bias correction; weight decay enters as an L2 term added to the
// gradient before the moment updates. t is the step counter after increment
// (first call passes t = 1).
// ---------------------------------------------------------------------------
struct AdamConfig {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 1e-5f;
};
void adam_update(std::size_t n, float* param, const float* grad, float* m, float* v,
                 std::int64_t t, const AdamConfig& cfg);

// Serial reference implementations. Plain nested loops, no OpenMP, no manual
// unrolling; the parallel kernels above are validated against these and the
// bench tool compares their throughput.
namespace ref {
Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias);
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            const Tensor& output_grad);
Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         Mode mode, Tensor& running_mean, Tensor& running_var,
                         BatchNormCache* cache, float eps = 1e-5f,
                         float momentum = 0.99f);
BatchNormGrads batchnorm_backward(const Tensor& input, const Tensor& gamma,
                                  const BatchNormCache& cache,
                                  const Tensor& output_grad);
MaxPool2dOut maxpool2d_forward(const Tensor& input, int kernel);
Tensor fully_connected_forward(const Tensor& input, const Tensor& weights,
                               const Tensor& bias);
FullyConnectedGrads fully_connected_backward(const Tensor& input, const Tensor& weights,
                                             const Tensor& output_grad);
}  // namespace ref

}  // namespace l3::nn
