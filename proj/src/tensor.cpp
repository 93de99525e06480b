#include "l3/tensor.hpp"

#include <cmath>
#include <numeric>

namespace l3 {

std::size_t Tensor::shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor dimension must be non-negative");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string Tensor::shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.f) {}

Tensor::Tensor(std::vector<int> shape, float fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_str(shape_));
}

std::vector<float>& Tensor::grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.f);
  return grad_;
}

const std::vector<float>& Tensor::grad() const {
  if (grad_.size() != data_.size())
    throw std::logic_error("gradient buffer not allocated");
  return grad_;
}

void Tensor::zero_grad() { grad_.assign(data_.size(), 0.f); }

void Tensor::reshape(std::vector<int> new_shape) {
  if (shape_size(new_shape) != data_.size())
    throw std::invalid_argument("reshape " + shape_str(shape_) + " -> " +
                                shape_str(new_shape) + " changes element count");
  shape_ = std::move(new_shape);
}

bool Tensor::all_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::size_t Tensor::idx2(int a, int b) const {
  return static_cast<std::size_t>(a) * shape_[1] + b;
}

std::size_t Tensor::idx4(int a, int b, int c, int d) const {
  return ((static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d;
}

}  // namespace l3
