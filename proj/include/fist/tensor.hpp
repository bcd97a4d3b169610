#pragma once

#include <cstddef>
#include <vector>

namespace fist::nn {

// Dense row-major matrix of 64-bit floats. Vectors are 1xN. On-disk
// checkpoints downcast to 32-bit; all in-memory arithmetic is double.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor constant(int r, int c, double v) {
    Tensor t(r, c);
    t.fill(v);
    return t;
  }
  static Tensor row_vector(std::vector<double> v) {
    Tensor t;
    t.rows = 1;
    t.cols = static_cast<int>(v.size());
    t.data = std::move(v);
    return t;
  }

  int size() const { return rows * cols; }
  bool empty() const { return data.empty(); }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
  void fill(double v);
  double max_abs() const;
};

}  // namespace fist::nn
