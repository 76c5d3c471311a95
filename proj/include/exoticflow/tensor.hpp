#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace exoticflow {

// Dense row-major tensor of small rank (3 or 4 in practice). Used for second
// derivatives of maps (out index first) and for the koe coefficient arrays.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  const std::vector<int>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  template <typename... I>
  double& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <typename... I>
  double operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double max_abs() const;
  // max |a - b| / max(1, max|b|); shapes must match.
  static double rel_diff(const Tensor& a, const Tensor& b);

 private:
  std::size_t offset(std::initializer_list<int> idx) const;

  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace exoticflow
