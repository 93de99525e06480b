#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "l3/rng.hpp"
#include "l3/tensor.hpp"

namespace test_support {

inline l3::Tensor random_tensor(std::vector<int> shape, l3::Rng& rng, float lo = -1.f,
                                float hi = 1.f) {
  l3::Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline bool close(float a, float b, float atol = 1e-5f, float rtol = 1e-5f) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

inline float max_abs_diff(const l3::Tensor& a, const l3::Tensor& b) {
  float m = 0.f;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Central finite differences of loss(x) = sum_i w_i * forward(x)_i against an
// analytic gradient. Returns the worst relative error, with the usual
// max(1, |g|) denominator.
inline double fd_max_rel_err(l3::Tensor& x, const std::function<l3::Tensor()>& forward,
                             const std::vector<float>& loss_weights,
                             const std::vector<float>& analytic_grad, double h) {
  auto loss = [&]() {
    l3::Tensor out = forward();
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
      s += static_cast<double>(loss_weights[i]) * out[i];
    return s;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float orig = x[i];
    x[i] = orig + static_cast<float>(h);
    const double lp = loss();
    x[i] = orig - static_cast<float>(h);
    const double lm = loss();
    x[i] = orig;
    const double num = (lp - lm) / (2.0 * h);
    const double ana = analytic_grad[i];
    const double rel =
        std::abs(num - ana) / std::max(1.0, std::max(std::abs(num), std::abs(ana)));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace test_support
