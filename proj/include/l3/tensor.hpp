#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace l3 {

// Dense row-major float tensor with an optional gradient buffer of the
// same length. The single value type used for signals, images, activations
// and parameters throughout the library.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, float fill);
  Tensor(std::vector<int> shape, std::vector<float> data);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, float v) { return Tensor(std::move(shape), v); }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // 2-D / 4-D indexed access, used in tests and cold paths.
  float& at(int a, int b) { return data_[idx2(a, b)]; }
  float at(int a, int b) const { return data_[idx2(a, b)]; }
  float& at(int a, int b, int c, int d) { return data_[idx4(a, b, c, d)]; }
  float at(int a, int b, int c, int d) const { return data_[idx4(a, b, c, d)]; }

  // Gradient buffer; allocated on first use, zero-initialized.
  bool has_grad() const { return !grad_.empty(); }
  std::vector<float>& grad();
  const std::vector<float>& grad() const;
  void zero_grad();
  void drop_grad() { grad_.clear(); grad_.shrink_to_fit(); }

  void reshape(std::vector<int> new_shape);
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  static std::size_t shape_size(const std::vector<int>& shape);
  static std::string shape_str(const std::vector<int>& shape);

 private:
  std::size_t idx2(int a, int b) const;
  std::size_t idx4(int a, int b, int c, int d) const;

  std::vector<int> shape_;
  std::vector<float> data_;
  std::vector<float> grad_;
};

}  // namespace l3
