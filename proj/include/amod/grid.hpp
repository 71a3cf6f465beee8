#pragma once

#include <cstddef>
#include <vector>

#include "amod/errors.hpp"

namespace amod {

// Dense row-major n0 x n1 array. Station indices are 0-based.
template <typename T>
class Grid2 {
 public:
  Grid2() : n0_(0), n1_(0) {}
  Grid2(int n0, int n1, T fill = T{}) : n0_(n0), n1_(n1), data_(static_cast<size_t>(n0) * n1, fill) {}

  T& operator()(int i, int j) { return data_[idx(i, j)]; }
  const T& operator()(int i, int j) const { return data_[idx(i, j)]; }

  int rows() const { return n0_; }
  int cols() const { return n1_; }
  bool same_shape(const Grid2& o) const { return n0_ == o.n0_ && n1_ == o.n1_; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

 private:
  size_t idx(int i, int j) const {
    if (i < 0 || i >= n0_ || j < 0 || j >= n1_) throw ShapeError("Grid2 index out of range");
    return static_cast<size_t>(i) * n1_ + j;
  }
  int n0_, n1_;
  std::vector<T> data_;
};

// Dense n x n x T tensor indexed (i, j, t) with t in 1..T, matching the
// planning-horizon convention used throughout.
template <typename T>
class Grid3 {
 public:
  Grid3() : n_(0), t_(0) {}
  Grid3(int n, int horizon, T fill = T{})
      : n_(n), t_(horizon), data_(static_cast<size_t>(n) * n * horizon, fill) {}

  T& operator()(int i, int j, int t) { return data_[idx(i, j, t)]; }
  const T& operator()(int i, int j, int t) const { return data_[idx(i, j, t)]; }

  int n() const { return n_; }
  int horizon() const { return t_; }
  bool same_shape(const Grid3& o) const { return n_ == o.n_ && t_ == o.t_; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

 private:
  size_t idx(int i, int j, int t) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || t < 1 || t > t_)
      throw ShapeError("Grid3 index out of range");
    return (static_cast<size_t>(i) * n_ + j) * t_ + (t - 1);
  }
  int n_, t_;
  std::vector<T> data_;
};

}  // namespace amod
