#include "exoticflow/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace exoticflow {

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  std::size_t total = 1;
  for (int s : shape_) {
    if (s < 0) throw std::invalid_argument("negative tensor extent");
    total *= static_cast<std::size_t>(s);
  }
  data_.assign(total, 0.0);
}

std::size_t Tensor::offset(std::initializer_list<int> idx) const {
  assert(idx.size() == shape_.size());
  std::size_t off = 0;
  std::size_t k = 0;
  for (int i : idx) {
    assert(i >= 0 && i < shape_[k]);
    off = off * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(i);
    ++k;
  }
  return off;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor::rel_diff(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) throw std::invalid_argument("tensor shape mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < a.data_.size(); ++i) err = std::max(err, std::abs(a.data_[i] - b.data_[i]));
  return err / std::max(1.0, b.max_abs());
}

}  // namespace exoticflow
