// Timing comparison between the serial reference kernels and the OpenMP
// kernels on shapes the network actually runs. Prints MMAC/s per kernel and
// the parallel speedup.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "l3/nnops.hpp"
#include "l3/rng.hpp"

using l3::Rng;
using l3::Tensor;
namespace nn = l3::nn;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.f, 1.f);
  return t;
}

double time_one(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void report(const std::string& name, double macs, double t_ref, double t_par) {
  std::printf("%-28s %9.1f ms serial  %9.1f ms openmp  %6.2fx  %8.0f MMAC/s\n",
              name.c_str(), t_ref * 1e3, t_par * 1e3, t_ref / t_par, macs / t_par / 1e6);
}

struct ConvCase {
  std::string name;
  int n, c, h, w, k;
  int reps;
};

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng(42);

  const std::vector<ConvCase> cases = {
      {"conv 8x16x64x64 ->16", 8, 16, 64, 64, 16, 3},
      {"conv 8x32x32x32 ->32", 8, 32, 32, 32, 32, 3},
      {"conv 8x128x8x8 ->128", 8, 128, 8, 8, 128, 3},
      {"conv 1x64x224x224 ->64", 1, 64, 224, 224, 64, 1},
      {"conv 1x512x28x28 ->512", 1, 512, 28, 28, 512, 1},
  };

  for (const auto& cs : cases) {
    Tensor in = random_tensor({cs.n, cs.c, cs.h, cs.w}, rng);
    Tensor ker = random_tensor({cs.k, cs.c, 3, 3}, rng);
    Tensor bias = random_tensor({cs.k}, rng);
    Tensor gout = random_tensor({cs.n, cs.k, cs.h, cs.w}, rng);
    const double macs_fwd =
        static_cast<double>(cs.n) * cs.k * cs.h * cs.w * cs.c * 9;

    double t_ref = time_one([&] { nn::ref::conv2d_forward(in, ker, bias); }, cs.reps);
    double t_par = time_one([&] { nn::conv2d_forward(in, ker, bias); }, cs.reps);
    report(cs.name + " fwd", macs_fwd, t_ref, t_par);

    t_ref = time_one([&] { nn::ref::conv2d_backward(in, ker, gout); }, cs.reps);
    t_par = time_one([&] { nn::conv2d_backward(in, ker, gout); }, cs.reps);
    report(cs.name + " bwd", macs_fwd * 2, t_ref, t_par);
  }

  {
    Tensor in = random_tensor({16, 64, 32, 32}, rng);
    Tensor gamma({64}, 1.f), beta({64});
    Tensor rm({64}), rv({64}, 1.f);
    nn::BatchNormCache cache;
    Tensor gout = random_tensor({16, 64, 32, 32}, rng);
    double t_ref = time_one(
        [&] {
          Tensor m = rm, v = rv;
          nn::ref::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, m, v, &cache);
        },
        10);
    double t_par = time_one(
        [&] {
          Tensor m = rm, v = rv;
          nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, m, v, &cache);
        },
        10);
    report("batchnorm 16x64x32x32 fwd", in.size() * 4.0, t_ref, t_par);
    t_ref = time_one([&] { nn::ref::batchnorm_backward(in, gamma, cache, gout); }, 10);
    t_par = time_one([&] { nn::batchnorm_backward(in, gamma, cache, gout); }, 10);
    report("batchnorm 16x64x32x32 bwd", in.size() * 6.0, t_ref, t_par);
  }

  {
    Tensor in = random_tensor({64, 1024}, rng);
    Tensor w = random_tensor({1024, 128}, rng);
    Tensor b = random_tensor({128}, rng);
    Tensor gout = random_tensor({64, 128}, rng);
    const double macs = 64.0 * 1024 * 128;
    double t_ref = time_one([&] { nn::ref::fully_connected_forward(in, w, b); }, 20);
    double t_par = time_one([&] { nn::fully_connected_forward(in, w, b); }, 20);
    report("fc 64x1024->128 fwd", macs, t_ref, t_par);
    t_ref = time_one([&] { nn::ref::fully_connected_backward(in, w, gout); }, 20);
    t_par = time_one([&] { nn::fully_connected_backward(in, w, gout); }, 20);
    report("fc 64x1024->128 bwd", macs * 2, t_ref, t_par);
  }

  {
    Tensor in = random_tensor({16, 64, 64, 64}, rng);
    double t_ref = time_one([&] { nn::ref::maxpool2d_forward(in, 2); }, 10);
    double t_par = time_one([&] { nn::maxpool2d_forward(in, 2); }, 10);
    report("maxpool 16x64x64x64 k2", in.size() * 1.0, t_ref, t_par);
  }
  return 0;
}
