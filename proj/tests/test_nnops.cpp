#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "l3/nnops.hpp"
#include "l3/rng.hpp"
#include "test_support.hpp"

using l3::Rng;
using l3::Tensor;
using test_support::close;
using test_support::fd_max_rel_err;
using test_support::max_abs_diff;
using test_support::random_tensor;
namespace nn = l3::nn;

TEST_CASE("conv2d identity kernel reproduces the input") {
  Rng rng(1);
  Tensor in = random_tensor({2, 3, 6, 7}, rng);
  Tensor ker({3, 3, 3, 3});
  for (int k = 0; k < 3; ++k) ker.at(k, k, 1, 1) = 1.f;
  Tensor bias({3});
  Tensor out = nn::conv2d_forward(in, ker, bias);
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("conv2d all-ones 3x3 on all-ones input counts the padded window") {
  Tensor in({1, 1, 3, 3}, 1.f);
  Tensor ker({1, 1, 3, 3}, 1.f);
  Tensor bias({1});
  Tensor out = nn::conv2d_forward(in, ker, bias);
  CHECK(out.at(0, 0, 1, 1) == doctest::Approx(9.f));
  CHECK(out.at(0, 0, 0, 0) == doctest::Approx(4.f));
  CHECK(out.at(0, 0, 0, 2) == doctest::Approx(4.f));
  CHECK(out.at(0, 0, 2, 0) == doctest::Approx(4.f));
  CHECK(out.at(0, 0, 2, 2) == doctest::Approx(4.f));
  CHECK(out.at(0, 0, 0, 1) == doctest::Approx(6.f));
}

TEST_CASE("conv2d gradients match central finite differences at step 1e-3") {
  Rng rng(7);
  Tensor in = random_tensor({1, 2, 5, 5}, rng);
  Tensor ker = random_tensor({3, 2, 3, 3}, rng);
  Tensor bias = random_tensor({3}, rng);
  Tensor w = random_tensor({1, 3, 5, 5}, rng);

  nn::Conv2dGrads g = nn::conv2d_backward(in, ker, w);
  auto fwd = [&] { return nn::conv2d_forward(in, ker, bias); };

  CHECK(fd_max_rel_err(in, fwd, w.values(), g.input.values(), 1e-3) <= 1e-3);
  CHECK(fd_max_rel_err(ker, fwd, w.values(), g.kernel.values(), 1e-3) <= 1e-3);
  CHECK(fd_max_rel_err(bias, fwd, w.values(), g.bias.values(), 1e-3) <= 1e-3);
}

TEST_CASE("conv2d parallel kernels agree with the serial reference") {
  Rng rng(11);
  for (auto [n, c, h, w, k] : {std::array<int, 5>{2, 3, 9, 11, 4},
                               std::array<int, 5>{1, 5, 4, 4, 2},
                               std::array<int, 5>{3, 2, 16, 7, 5}}) {
    Tensor in = random_tensor({n, c, h, w}, rng);
    Tensor ker = random_tensor({k, c, 3, 3}, rng);
    Tensor bias = random_tensor({k}, rng);
    Tensor a = nn::conv2d_forward(in, ker, bias);
    Tensor b = nn::ref::conv2d_forward(in, ker, bias);
    CHECK(max_abs_diff(a, b) <= 1e-4f);

    Tensor go = random_tensor({n, k, h, w}, rng);
    nn::Conv2dGrads ga = nn::conv2d_backward(in, ker, go);
    nn::Conv2dGrads gb = nn::ref::conv2d_backward(in, ker, go);
    CHECK(max_abs_diff(ga.input, gb.input) <= 1e-4f);
    CHECK(max_abs_diff(ga.kernel, gb.kernel) <= 1e-3f);
    CHECK(max_abs_diff(ga.bias, gb.bias) <= 1e-3f);
  }
}

TEST_CASE("conv2d rejects mismatched shapes") {
  Tensor in({1, 2, 4, 4});
  Tensor ker({3, 3, 3, 3});
  Tensor bias({3});
  CHECK_THROWS(nn::conv2d_forward(in, ker, bias));
  Tensor ker5({3, 2, 5, 5});
  CHECK_THROWS(nn::conv2d_forward(in, ker5, bias));
}

TEST_CASE("batchnorm normalizes {1,2,3} with the population variance") {
  Tensor in({3, 1, 1, 1}, {1.f, 2.f, 3.f});
  Tensor gamma({1}, 1.f), beta({1});
  Tensor rm({1}), rv({1}, 1.f);
  Tensor out = nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, rm, rv, nullptr);
  CHECK(out[0] == doctest::Approx(-1.2247).epsilon(1e-3));
  CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(out[2] == doctest::Approx(1.2247).epsilon(1e-3));
}

TEST_CASE("batchnorm train output has zero mean and unit variance per channel") {
  Rng rng(3);
  Tensor in = random_tensor({4, 3, 5, 5}, rng);
  Tensor gamma({3}, 1.f), beta({3});
  Tensor rm({3}), rv({3}, 1.f);
  Tensor out = nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, rm, rv, nullptr);
  const std::size_t plane = 25;
  const std::size_t m = 4 * plane;
  for (int c = 0; c < 3; ++c) {
    double s = 0.0, ss = 0.0;
    for (int n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < plane; ++i) {
        const float v = out[(static_cast<std::size_t>(n) * 3 + c) * plane + i];
        s += v;
        ss += static_cast<double>(v) * v;
      }
    const double mean = s / m;
    const double var = ss / m - mean * mean;
    CHECK(std::abs(mean) <= 1e-5);
    CHECK(std::abs(var - 1.0) <= 1e-4);
  }
}

TEST_CASE("batchnorm gradients match finite differences on 4x2x3x3") {
  Rng rng(17);
  Tensor in = random_tensor({4, 2, 3, 3}, rng);
  Tensor gamma = random_tensor({2}, rng, 0.5f, 1.5f);
  Tensor beta = random_tensor({2}, rng);
  Tensor w = random_tensor({4, 2, 3, 3}, rng);

  Tensor rm({2}), rv({2}, 1.f);
  nn::BatchNormCache cache;
  nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, rm, rv, &cache);
  nn::BatchNormGrads g = nn::batchnorm_backward(in, gamma, cache, w);

  auto fwd = [&] {
    Tensor m({2}), v({2}, 1.f);
    return nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, m, v, nullptr);
  };
  CHECK(fd_max_rel_err(in, fwd, w.values(), g.input.values(), 3e-3) <= 1e-3);
  CHECK(fd_max_rel_err(gamma, fwd, w.values(), g.gamma.values(), 3e-3) <= 1e-3);
  CHECK(fd_max_rel_err(beta, fwd, w.values(), g.beta.values(), 3e-3) <= 1e-3);
}

TEST_CASE("batchnorm eval mode applies running statistics") {
  Tensor in({1, 1, 1, 2}, {3.f, 5.f});
  Tensor gamma({1}, 2.f), beta({1}, 1.f);
  Tensor rm({1}, 3.f), rv({1}, 4.f);
  Tensor out = nn::batchnorm_forward(in, gamma, beta, nn::Mode::kEval, rm, rv, nullptr);
  CHECK(out[0] == doctest::Approx(1.f).epsilon(1e-4));
  CHECK(out[1] == doctest::Approx(1.f + 2.f * 2.f / std::sqrt(4.00001f)).epsilon(1e-4));
  CHECK(rm[0] == 3.f);  // eval must not touch the stats
}

TEST_CASE("batchnorm train mode rejects a single element per channel") {
  Tensor in({1, 2, 1, 1});
  Tensor gamma({2}, 1.f), beta({2});
  Tensor rm({2}), rv({2}, 1.f);
  CHECK_THROWS(nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, rm, rv, nullptr));
}

TEST_CASE("batchnorm parallel agrees with serial reference") {
  Rng rng(23);
  Tensor in = random_tensor({5, 4, 6, 7}, rng);
  Tensor gamma = random_tensor({4}, rng, 0.5f, 2.f);
  Tensor beta = random_tensor({4}, rng);
  Tensor rm1({4}), rv1({4}, 1.f), rm2({4}), rv2({4}, 1.f);
  nn::BatchNormCache c1, c2;
  Tensor a = nn::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, rm1, rv1, &c1);
  Tensor b = nn::ref::batchnorm_forward(in, gamma, beta, nn::Mode::kTrain, rm2, rv2, &c2);
  CHECK(max_abs_diff(a, b) <= 1e-4f);
  CHECK(max_abs_diff(rm1, rm2) <= 1e-5f);
  CHECK(max_abs_diff(rv1, rv2) <= 1e-5f);

  Tensor go = random_tensor({5, 4, 6, 7}, rng);
  nn::BatchNormGrads ga = nn::batchnorm_backward(in, gamma, c1, go);
  nn::BatchNormGrads gb = nn::ref::batchnorm_backward(in, gamma, c2, go);
  CHECK(max_abs_diff(ga.input, gb.input) <= 1e-4f);
  CHECK(max_abs_diff(ga.gamma, gb.gamma) <= 1e-3f);
  CHECK(max_abs_diff(ga.beta, gb.beta) <= 1e-3f);
}

TEST_CASE("maxpool floor semantics and paper shape chain") {
  Rng rng(5);
  Tensor in = random_tensor({1, 1, 5, 5}, rng);
  auto out = nn::maxpool2d_forward(in, 2);
  CHECK(out.output.shape() == std::vector<int>({1, 1, 2, 2}));

  // 257x199 pooled four times with k=2 lands on 16x12
  Tensor spec = random_tensor({1, 1, 257, 199}, rng);
  Tensor cur = spec;
  for (int i = 0; i < 4; ++i) cur = nn::maxpool2d_forward(cur, 2).output;
  CHECK(cur.shape() == std::vector<int>({1, 1, 16, 12}));
}

TEST_CASE("maxpool routes all gradient to the argmax, first index on ties") {
  Tensor in({1, 1, 2, 2}, {3.f, 1.f, 2.f, 0.f});
  auto out = nn::maxpool2d_forward(in, 2);
  CHECK(out.output[0] == 3.f);
  Tensor go({1, 1, 1, 1}, {5.f});
  Tensor gi = nn::maxpool_backward(out.argmax, go, in.shape());
  CHECK(gi[0] == 5.f);
  CHECK(gi[1] == 0.f);
  CHECK(gi[2] == 0.f);
  CHECK(gi[3] == 0.f);

  Tensor ties({1, 1, 2, 2}, {7.f, 7.f, 7.f, 7.f});
  auto t = nn::maxpool2d_forward(ties, 2);
  CHECK(t.argmax[0] == 0);
}

TEST_CASE("maxpool rejects kernels that leave no output") {
  Tensor in({1, 1, 3, 5});
  CHECK_THROWS(nn::maxpool2d_forward(in, 4));
  CHECK_NOTHROW(nn::maxpool2d_forward(in, 3));
}

TEST_CASE("global maxpool equals full-extent pooling") {
  Rng rng(9);
  Tensor in = random_tensor({2, 3, 6, 6}, rng);
  auto g = nn::global_maxpool_forward(in);
  auto p = nn::maxpool2d_forward(in, 6);
  CHECK(g.output.shape() == std::vector<int>({2, 3}));
  for (std::size_t i = 0; i < g.output.size(); ++i) CHECK(g.output[i] == p.output[i]);
}

TEST_CASE("maxpool output shape obeys floor arithmetic") {
  Rng rng(13);
  for (int h = 1; h <= 9; h += 2)
    for (int w = 2; w <= 10; w += 3)
      for (int k = 1; k <= std::min(h, w); ++k) {
        Tensor in = random_tensor({1, 2, h, w}, rng);
        auto out = nn::maxpool2d_forward(in, k);
        CHECK(out.output.dim(2) == h / k);
        CHECK(out.output.dim(3) == w / k);
      }
}

TEST_CASE("fully connected identity and paper fusion shape") {
  Rng rng(19);
  Tensor in = random_tensor({2, 4}, rng);
  Tensor w({4, 4});
  for (int i = 0; i < 4; ++i) w.at(i, i) = 1.f;
  Tensor b({4});
  Tensor out = nn::fully_connected_forward(in, w, b);
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(out[i] == in[i]);

  Tensor big = random_tensor({1, 1024}, rng);
  Tensor w2 = random_tensor({1024, 128}, rng, -0.1f, 0.1f);
  Tensor b2({128});
  CHECK(nn::fully_connected_forward(big, w2, b2).shape() == std::vector<int>({1, 128}));

  Tensor wbad({5, 4});
  CHECK_THROWS(nn::fully_connected_forward(in, wbad, b));
}

TEST_CASE("fully connected gradients match finite differences") {
  Rng rng(29);
  Tensor in = random_tensor({3, 4}, rng);
  Tensor w = random_tensor({4, 5}, rng);
  Tensor b = random_tensor({5}, rng);
  Tensor lw = random_tensor({3, 5}, rng);
  nn::FullyConnectedGrads g = nn::fully_connected_backward(in, w, lw);
  auto fwd = [&] { return nn::fully_connected_forward(in, w, b); };
  CHECK(fd_max_rel_err(in, fwd, lw.values(), g.input.values(), 1e-3) <= 1e-3);
  CHECK(fd_max_rel_err(w, fwd, lw.values(), g.weights.values(), 1e-3) <= 1e-3);
  CHECK(fd_max_rel_err(b, fwd, lw.values(), g.bias.values(), 1e-3) <= 1e-3);

  nn::FullyConnectedGrads gr = nn::ref::fully_connected_backward(in, w, lw);
  CHECK(max_abs_diff(g.input, gr.input) <= 1e-4f);
  CHECK(max_abs_diff(g.weights, gr.weights) <= 1e-4f);
}

TEST_CASE("relu forward and backward") {
  Tensor in({3}, {-1.f, 0.f, 2.f});
  Tensor out = nn::relu_forward(in);
  CHECK(out[0] == 0.f);
  CHECK(out[1] == 0.f);
  CHECK(out[2] == 2.f);

  Tensor go({3}, {10.f, 10.f, 10.f});
  Tensor gi = nn::relu_backward(in, go);
  CHECK(gi[0] == 0.f);
  CHECK(gi[1] == 0.f);
  CHECK(gi[2] == 10.f);

  Rng rng(31);
  Tensor pos = random_tensor({2, 3, 4, 4}, rng, 0.f, 1.f);
  Tensor id = nn::relu_forward(pos);
  for (std::size_t i = 0; i < pos.size(); ++i) CHECK(id[i] == pos[i]);
}

TEST_CASE("softmax cross entropy: uniform case, stability, finite differences") {
  Tensor eq({1, 2}, {0.3f, 0.3f});
  auto r = nn::softmax_cross_entropy(eq, {0});
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-5));

  Tensor big({1, 2}, {1000.f, 0.f});
  auto rb = nn::softmax_cross_entropy(big, {0});
  CHECK(rb.loss == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(std::isfinite(rb.loss));

  CHECK_THROWS(nn::softmax_cross_entropy(big, {2}));
  CHECK_THROWS(nn::softmax_cross_entropy(big, {-1}));

  Rng rng(37);
  Tensor logits = random_tensor({3, 4}, rng);
  std::vector<int> targets = {1, 3, 0};
  auto g = nn::softmax_cross_entropy(logits, targets);
  double worst = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const float orig = logits[i];
    const double h = 1e-2;
    logits[i] = orig + static_cast<float>(h);
    const double lp = nn::softmax_cross_entropy(logits, targets).loss;
    logits[i] = orig - static_cast<float>(h);
    const double lm = nn::softmax_cross_entropy(logits, targets).loss;
    logits[i] = orig;
    const double num = (lp - lm) / (2 * h);
    const double ana = g.logits_grad[i];
    worst = std::max(worst, std::abs(num - ana) /
                                std::max(1.0, std::max(std::abs(num), std::abs(ana))));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("adam first step matches the hand-evaluated update") {
  float param = 0.f, m = 0.f, v = 0.f;
  const float grad = 0.5f;
  nn::AdamConfig cfg;
  cfg.lr = 1e-4f;
  cfg.weight_decay = 0.f;
  nn::adam_update(1, &param, &grad, &m, &v, 1, cfg);
  // mhat = g, vhat = g^2 -> step = -lr * g / (|g| + eps)
  CHECK(param == doctest::Approx(-9.9999998e-5).epsilon(1e-6));

  // zero gradient leaves the parameter unchanged
  float p2 = 0.7f, m2 = 0.f, v2 = 0.f;
  const float g0 = 0.f;
  nn::adam_update(1, &p2, &g0, &m2, &v2, 1, cfg);
  CHECK(p2 == 0.7f);

  // identical state produces identical updates
  float pa = 0.3f, ma = 0.01f, va = 0.02f;
  float pb = 0.3f, mb = 0.01f, vb = 0.02f;
  const float g = -0.2f;
  nn::AdamConfig c2;
  nn::adam_update(1, &pa, &g, &ma, &va, 5, c2);
  nn::adam_update(1, &pb, &g, &mb, &vb, 5, c2);
  CHECK(pa == pb);
  CHECK(ma == mb);
  CHECK(va == vb);
}

TEST_CASE("adam applies coupled weight decay through the gradient") {
  float param = 2.f, m = 0.f, v = 0.f;
  const float grad = 0.f;
  nn::AdamConfig cfg;
  cfg.lr = 1e-3f;
  cfg.weight_decay = 0.1f;
  nn::adam_update(1, &param, &grad, &m, &v, 1, cfg);
  // effective gradient 0.2 -> first step is -lr * sign
  CHECK(param == doctest::Approx(2.f - 1e-3f).epsilon(1e-5));
}

TEST_CASE("ops are deterministic across repeated invocations") {
  Rng rng(41);
  Tensor in = random_tensor({3, 4, 9, 9}, rng);
  Tensor ker = random_tensor({5, 4, 3, 3}, rng);
  Tensor bias = random_tensor({5}, rng);
  Tensor a = nn::conv2d_forward(in, ker, bias);
  Tensor b = nn::conv2d_forward(in, ker, bias);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  Tensor go = random_tensor({3, 5, 9, 9}, rng);
  auto g1 = nn::conv2d_backward(in, ker, go);
  auto g2 = nn::conv2d_backward(in, ker, go);
  for (std::size_t i = 0; i < g1.kernel.size(); ++i) CHECK(g1.kernel[i] == g2.kernel[i]);
}
