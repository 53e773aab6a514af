// include/ssip/nn/matrix.hpp

// Copyright 2026  The ssip authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SSIP_NN_MATRIX_HPP_
#define SSIP_NN_MATRIX_HPP_

#include <vector>

namespace ssip::nn {

/// Dense row-major matrix of doubles. Double precision throughout: the test
/// suite verifies analytic gradients against finite differences, which is
/// hopeless in float.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  static Matrix full(int r, int c, double v) {
    Matrix m(r, c);
    for (auto& x : m.data) x = v;
    return m;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  void fill(double v) { for (auto& x : data) x = v; }
  bool all_finite() const;
};

/// C = A * B. Throws ShapeError on mismatched inner dimensions.
Matrix matmul(const Matrix& a, const Matrix& b);

/// C += A * B
void matmul_acc(Matrix& c, const Matrix& a, const Matrix& b);
/// C += A * B^T
void matmul_nt_acc(Matrix& c, const Matrix& a, const Matrix& b);
/// C += A^T * B
void matmul_tn_acc(Matrix& c, const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// a += b (same shape)
void add_in_place(Matrix& a, const Matrix& b);

}  // namespace ssip::nn

#endif  // SSIP_NN_MATRIX_HPP_
