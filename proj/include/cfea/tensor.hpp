#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace cfea {

// Dense row-major double tensor. The last axis varies fastest; network
// activations use (N, C, H, W) and parameter arrays whatever shape the layer
// dictates.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  // (n, c, h, w) accessor for 4-d tensors.
  double& at4(int n, int c, int h, int w) {
    return data_[static_cast<std::size_t>(((static_cast<std::int64_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  double at4(int n, int c, int h, int w) const {
    return data_[static_cast<std::size_t>(((static_cast<std::int64_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  // (c, h, w) accessor for 3-d tensors.
  double& at3(int c, int h, int w) {
    return data_[static_cast<std::size_t>((static_cast<std::int64_t>(c) * shape_[1] + h) * shape_[2] + w)];
  }
  double at3(int c, int h, int w) const {
    return data_[static_cast<std::size_t>((static_cast<std::int64_t>(c) * shape_[1] + h) * shape_[2] + w)];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  double min() const;
  double max() const;
  double sum() const;
  double mean() const { return size() > 0 ? sum() / static_cast<double>(size()) : 0.0; }

  void fill(double v);
  void add_scaled(const Tensor& other, double scale);  // this += scale * other
  void scale(double s);

  bool operator==(const Tensor& other) const { return shape_ == other.shape_ && data_ == other.data_; }

  const std::vector<double>& storage() const { return data_; }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::int64_t shape_size(const std::vector<int>& shape);

}  // namespace cfea
