#include "cfea/tensor.hpp"

#include <cmath>
#include <limits>

#include "cfea/error.hpp"

namespace cfea {

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw InputError("tensor shape has negative dimension");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_size(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != static_cast<std::int64_t>(data_.size()))
    throw InputError("tensor data length does not match shape");
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = v < m ? v : m;
  return m;
}

double Tensor::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = v > m ? v : m;
  return m;
}

double Tensor::sum() const {
  // Kahan summation keeps reductions order-stable and accurate.
  double s = 0.0, c = 0.0;
  for (double v : data_) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::add_scaled(const Tensor& other, double scale) {
  if (!same_shape(other)) throw InputError("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void Tensor::scale(double s) {
  for (double& x : data_) x *= s;
}

}  // namespace cfea
