#pragma once

#include <cstddef>
#include <vector>

namespace hydroflow {

// Dense row-major matrix of doubles; the only linear-algebra container used.
struct Matrix {
  size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double* row(size_t i) { return data.data() + i * cols; }
  const double* row(size_t i) const { return data.data() + i * cols; }
  double& at(size_t i, size_t j) { return data[i * cols + j]; }
  double at(size_t i, size_t j) const { return data[i * cols + j]; }
  bool empty() const { return rows == 0 || cols == 0; }
};

}  // namespace hydroflow
