// src/nn/matrix.cpp

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

#include "ssip/nn/matrix.hpp"

#include <cmath>
#include <string>

#include "ssip/errors.hpp"

namespace ssip::nn {

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

void check_inner(int a_cols, int b_rows, const char* what) {
  if (a_cols != b_rows) {
    throw ShapeError(std::string(what) + ": inner dimensions " +
                     std::to_string(a_cols) + " and " + std::to_string(b_rows) +
                     " do not match");
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  matmul_acc(c, a, b);
  return c;
}

// i-k-j loop order: the inner loop walks both C and B contiguously.
void matmul_acc(Matrix& c, const Matrix& a, const Matrix& b) {
  check_inner(a.cols, b.rows, "matmul");
  if (c.rows != a.rows || c.cols != b.cols) {
    throw ShapeError("matmul_acc: bad accumulator shape");
  }
  const int m = a.rows, k = a.cols, n = b.cols;
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const double aik = pa[static_cast<std::size_t>(i) * k + kk];
      if (aik == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(kk) * n;
      double* crow = pc + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        crow[j] += aik * brow[j];
      }
    }
  }
}

void matmul_nt_acc(Matrix& c, const Matrix& a, const Matrix& b) {
  check_inner(a.cols, b.cols, "matmul_nt");
  if (c.rows != a.rows || c.cols != b.rows) {
    throw ShapeError("matmul_nt_acc: bad accumulator shape");
  }
  const int m = a.rows, k = a.cols, n = b.rows;
  for (int i = 0; i < m; ++i) {
    const double* arow = a.data.data() + static_cast<std::size_t>(i) * k;
    double* crow = c.data.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b.data.data() + static_cast<std::size_t>(j) * k;
      double dot = 0.0;
      for (int kk = 0; kk < k; ++kk) {
        dot += arow[kk] * brow[kk];
      }
      crow[j] += dot;
    }
  }
}

void matmul_tn_acc(Matrix& c, const Matrix& a, const Matrix& b) {
  check_inner(a.rows, b.rows, "matmul_tn");
  if (c.rows != a.cols || c.cols != b.cols) {
    throw ShapeError("matmul_tn_acc: bad accumulator shape");
  }
  const int m = a.cols, k = a.rows, n = b.cols;
  for (int kk = 0; kk < k; ++kk) {
    const double* arow = a.data.data() + static_cast<std::size_t>(kk) * m;
    const double* brow = b.data.data() + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.data.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        crow[j] += aki * brow[j];
      }
    }
  }
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      t.at(j, i) = a.at(i, j);
    }
  }
  return t;
}

void add_in_place(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add_in_place: shapes differ");
  }
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    a.data[i] += b.data[i];
  }
}

}  // namespace ssip::nn
