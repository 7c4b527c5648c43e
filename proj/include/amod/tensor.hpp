#pragma once

#include <Eigen/Core>

#include <numeric>
#include <string>
#include <vector>

#include "amod/common.hpp"

namespace amod {

// Dense row-major tensor. Kept deliberately small: shape bookkeeping plus
// an Eigen array, with maps for the common matrix views.
template <typename Scalar>
struct Tensor {
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  std::vector<int> shape;
  Storage data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data = Storage::Zero(count(shape));
  }

  static Eigen::Index count(const std::vector<int>& s) {
    Eigen::Index n = 1;
    for (int e : s) {
      if (e <= 0) throw DataError("tensor: non-positive extent");
      n *= e;
    }
    return n;
  }

  Eigen::Index size() const { return data.size(); }

  int extent(std::size_t i) const { return shape.at(i); }

  void set_zero() { data.setZero(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }
};

template <typename Scalar>
void check_same_shape(const Tensor<Scalar>& a, const Tensor<Scalar>& b,
                      const char* what) {
  if (!a.same_shape(b))
    throw DataError(std::string(what) + ": shape mismatch " + a.shape_str() +
                    " vs " + b.shape_str());
}

}  // namespace amod
