// src/nn/tape.cpp

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

#include "ssip/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssip/errors.hpp"

namespace ssip::nn {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double huber(double error, double delta) {
  const double a = std::abs(error);
  if (a <= delta) {
    return 0.5 * error * error;
  }
  return delta * (a - 0.5 * delta);
}

Matrix sinusoidal_positional_encoding(int t, int dim) {
  Matrix pe(t, dim);
  for (int pos = 0; pos < t; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double angle =
          pos * std::exp(-std::log(10000.0) * static_cast<double>(i) / dim);
      pe.at(pos, i) = std::sin(angle);
      if (i + 1 < dim) {
        pe.at(pos, i + 1) = std::cos(angle);
      }
    }
  }
  return pe;
}

Var Tape::push(Matrix value, std::function<void(Tape&)> backprop) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(backprop)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value) { return push(std::move(value), {}); }

void Tape::backward(Var root) {
  if (!root.valid() || root.id >= static_cast<int>(nodes_.size())) {
    throw RangeError("backward: invalid root node");
  }
  if (nodes_[root.id].value.rows != 1 || nodes_[root.id].value.cols != 1) {
    throw ShapeError("backward: root must be a 1x1 scalar node");
  }
  for (int i = 0; i <= root.id; ++i) {
    Node& n = nodes_[i];
    n.grad = Matrix::zeros(n.value.rows, n.value.cols);
  }
  nodes_[root.id].grad.at(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].backprop) {
      nodes_[i].backprop(*this);
    }
  }
}

Var Tape::matmul(Var a, Var b) {
  Matrix out = nn::matmul(value(a), value(b));
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, b, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    matmul_nt_acc(t.grad_ref(a.id), g, t.nodes_[b.id].value);  // dA += g B^T
    matmul_tn_acc(t.grad_ref(b.id), t.nodes_[a.id].value, g);  // dB += A^T g
  });
}

Var Tape::add(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (!va.same_shape(vb)) {
    throw ShapeError("add: shapes differ");
  }
  Matrix out = va;
  add_in_place(out, vb);
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, b, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    add_in_place(t.grad_ref(a.id), g);
    add_in_place(t.grad_ref(b.id), g);
  });
}

Var Tape::sub(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (!va.same_shape(vb)) {
    throw ShapeError("sub: shapes differ");
  }
  Matrix out = va;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= vb.data[i];
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, b, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    add_in_place(t.grad_ref(a.id), g);
    Matrix& gb = t.grad_ref(b.id);
    for (std::size_t i = 0; i < gb.data.size(); ++i) gb.data[i] -= g.data[i];
  });
}

Var Tape::add_rowvec(Var a, Var row) {
  const Matrix& va = value(a);
  const Matrix& vr = value(row);
  if (vr.rows != 1 || vr.cols != va.cols) {
    throw ShapeError("add_rowvec: need a 1x" + std::to_string(va.cols) +
                     " row vector");
  }
  Matrix out = va;
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) {
      out.at(i, j) += vr.at(0, j);
    }
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, row, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    add_in_place(t.grad_ref(a.id), g);
    Matrix& gr = t.grad_ref(row.id);
    for (int i = 0; i < g.rows; ++i) {
      for (int j = 0; j < g.cols; ++j) {
        gr.at(0, j) += g.at(i, j);
      }
    }
  });
}

Var Tape::scale(Var a, double s) {
  Matrix out = value(a);
  for (auto& x : out.data) x *= s;
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, s, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    Matrix& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < ga.data.size(); ++i) {
      ga.data[i] += s * g.data[i];
    }
  });
}

Var Tape::add_const(Var a, const Matrix& c) {
  const Matrix& va = value(a);
  if (!va.same_shape(c)) {
    throw ShapeError("add_const: shapes differ");
  }
  Matrix out = va;
  add_in_place(out, c);
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, res](Tape& t) {
    add_in_place(t.grad_ref(a.id), t.nodes_[res.id].grad);
  });
}

Var Tape::gelu(Var a) {
  const Matrix& va = value(a);
  Matrix out = va;
  for (auto& x : out.data) {
    x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    const Matrix& x = t.nodes_[a.id].value;
    Matrix& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      const double xv = x.data[i];
      const double cdf = 0.5 * (1.0 + std::erf(xv * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * xv * xv);
      ga.data[i] += g.data[i] * (cdf + xv * pdf);
    }
  });
}

Var Tape::relu(Var a) {
  Matrix out = value(a);
  for (auto& x : out.data) x = std::max(x, 0.0);
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    const Matrix& x = t.nodes_[a.id].value;
    Matrix& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      if (x.data[i] > 0.0) {
        ga.data[i] += g.data[i];
      }
    }
  });
}

Var Tape::softmax_rows(Var a) {
  Matrix out = value(a);
  for (int i = 0; i < out.rows; ++i) {
    double* row = out.data.data() + static_cast<std::size_t>(i) * out.cols;
    const double m = *std::max_element(row, row + out.cols);
    double sum = 0.0;
    for (int j = 0; j < out.cols; ++j) {
      row[j] = std::exp(row[j] - m);
      sum += row[j];
    }
    for (int j = 0; j < out.cols; ++j) {
      row[j] /= sum;
    }
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, res](Tape& t) {
    const Matrix& y = t.nodes_[res.id].value;
    const Matrix& g = t.nodes_[res.id].grad;
    Matrix& ga = t.grad_ref(a.id);
    for (int i = 0; i < y.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < y.cols; ++j) {
        dot += g.at(i, j) * y.at(i, j);
      }
      for (int j = 0; j < y.cols; ++j) {
        ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
      }
    }
  });
}

Var Tape::layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  const Matrix& vx = value(x);
  const Matrix& vg = value(gain);
  const Matrix& vb = value(bias);
  if (vg.rows != 1 || vb.rows != 1 || vg.cols != vx.cols ||
      vb.cols != vx.cols) {
    throw ShapeError("layer_norm_rows: gain/bias must be 1x" +
                     std::to_string(vx.cols));
  }
  const int n = vx.cols;
  Matrix out(vx.rows, n);
  std::vector<double> inv_sigma(vx.rows);
  Matrix normalized(vx.rows, n);  // kept for the backward pass
  for (int i = 0; i < vx.rows; ++i) {
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += vx.at(i, j);
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = vx.at(i, j) - mean;
      var += d * d;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_sigma[i] = inv;
    for (int j = 0; j < n; ++j) {
      const double xn = (vx.at(i, j) - mean) * inv;
      normalized.at(i, j) = xn;
      out.at(i, j) = vg.at(0, j) * xn + vb.at(0, j);
    }
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [x, gain, bias, res, inv_sigma = std::move(inv_sigma),
                               normalized = std::move(normalized)](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    const Matrix& vg = t.nodes_[gain.id].value;
    Matrix& gx = t.grad_ref(x.id);
    Matrix& gg = t.grad_ref(gain.id);
    Matrix& gb = t.grad_ref(bias.id);
    const int n = g.cols;
    for (int i = 0; i < g.rows; ++i) {
      double mean_h = 0.0;
      double mean_hx = 0.0;
      for (int j = 0; j < n; ++j) {
        const double h = g.at(i, j) * vg.at(0, j);
        mean_h += h;
        mean_hx += h * normalized.at(i, j);
        gg.at(0, j) += g.at(i, j) * normalized.at(i, j);
        gb.at(0, j) += g.at(i, j);
      }
      mean_h /= n;
      mean_hx /= n;
      for (int j = 0; j < n; ++j) {
        const double h = g.at(i, j) * vg.at(0, j);
        gx.at(i, j) +=
            inv_sigma[i] * (h - mean_h - normalized.at(i, j) * mean_hx);
      }
    }
  });
}

Var Tape::mean_rows(Var a) {
  const Matrix& va = value(a);
  if (va.rows == 0) {
    throw EmptyInput("mean_rows of an empty matrix");
  }
  Matrix out(1, va.cols);
  for (int i = 0; i < va.rows; ++i) {
    for (int j = 0; j < va.cols; ++j) {
      out.at(0, j) += va.at(i, j);
    }
  }
  const double inv = 1.0 / va.rows;
  for (auto& x : out.data) x *= inv;
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, inv, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    Matrix& ga = t.grad_ref(a.id);
    for (int i = 0; i < ga.rows; ++i) {
      for (int j = 0; j < ga.cols; ++j) {
        ga.at(i, j) += inv * g.at(0, j);
      }
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw EmptyInput("concat_rows of nothing");
  }
  const int cols = value(parts.front()).cols;
  int rows = 0;
  for (Var p : parts) {
    if (value(p).cols != cols) {
      throw ShapeError("concat_rows: column counts differ");
    }
    rows += value(p).rows;
  }
  Matrix out(rows, cols);
  int r = 0;
  for (Var p : parts) {
    const Matrix& vp = value(p);
    std::copy(vp.data.begin(), vp.data.end(),
              out.data.begin() + static_cast<std::size_t>(r) * cols);
    r += vp.rows;
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [parts, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    int r = 0;
    for (Var p : parts) {
      Matrix& gp = t.grad_ref(p.id);
      const std::size_t offset = static_cast<std::size_t>(r) * g.cols;
      for (std::size_t i = 0; i < gp.data.size(); ++i) {
        gp.data[i] += g.data[offset + i];
      }
      r += gp.rows;
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw EmptyInput("concat_cols of nothing");
  }
  const int rows = value(parts.front()).rows;
  int cols = 0;
  for (Var p : parts) {
    if (value(p).rows != rows) {
      throw ShapeError("concat_cols: row counts differ");
    }
    cols += value(p).cols;
  }
  Matrix out(rows, cols);
  int c = 0;
  for (Var p : parts) {
    const Matrix& vp = value(p);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < vp.cols; ++j) {
        out.at(i, c + j) = vp.at(i, j);
      }
    }
    c += vp.cols;
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [parts, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    int c = 0;
    for (Var p : parts) {
      Matrix& gp = t.grad_ref(p.id);
      for (int i = 0; i < gp.rows; ++i) {
        for (int j = 0; j < gp.cols; ++j) {
          gp.at(i, j) += g.at(i, c + j);
        }
      }
      c += gp.cols;
    }
  });
}

Var Tape::slice_cols(Var a, int col_begin, int col_end) {
  const Matrix& va = value(a);
  if (col_begin < 0 || col_end > va.cols || col_begin >= col_end) {
    throw ShapeError("slice_cols: bad range [" + std::to_string(col_begin) +
                     ", " + std::to_string(col_end) + ") for " +
                     std::to_string(va.cols) + " columns");
  }
  Matrix out(va.rows, col_end - col_begin);
  for (int i = 0; i < va.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) {
      out.at(i, j) = va.at(i, col_begin + j);
    }
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, col_begin, res](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    Matrix& ga = t.grad_ref(a.id);
    for (int i = 0; i < g.rows; ++i) {
      for (int j = 0; j < g.cols; ++j) {
        ga.at(i, col_begin + j) += g.at(i, j);
      }
    }
  });
}

Var Tape::transpose(Var a) {
  Matrix out = nn::transpose(value(a));
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, res](Tape& t) {
    add_in_place(t.grad_ref(a.id), nn::transpose(t.nodes_[res.id].grad));
  });
}

Var Tape::dropout(Var a, double p, SeededRng& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw RangeError("dropout probability must be in [0, 1)");
  }
  if (p == 0.0) {
    return a;
  }
  const Matrix& va = value(a);
  Matrix mask(va.rows, va.cols);
  const double keep_scale = 1.0 / (1.0 - p);
  for (auto& m : mask.data) {
    m = rng.uniform() < p ? 0.0 : keep_scale;
  }
  Matrix out = va;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] *= mask.data[i];
  }
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out), [a, res, mask = std::move(mask)](Tape& t) {
    const Matrix& g = t.nodes_[res.id].grad;
    Matrix& ga = t.grad_ref(a.id);
    for (std::size_t i = 0; i < ga.data.size(); ++i) {
      ga.data[i] += g.data[i] * mask.data[i];
    }
  });
}

Var Tape::huber_mean(Var pred, const Matrix& targets, double delta) {
  const Matrix& vp = value(pred);
  if (!vp.same_shape(targets)) {
    throw ShapeError("huber_mean: prediction/target shapes differ");
  }
  if (vp.empty()) {
    throw EmptyInput("huber_mean of an empty batch");
  }
  if (delta <= 0.0) {
    throw RangeError("huber delta must be positive");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < vp.data.size(); ++i) {
    loss += huber(vp.data[i] - targets.data[i], delta);
  }
  loss /= static_cast<double>(vp.data.size());
  Matrix out(1, 1);
  out.at(0, 0) = loss;
  Var res{static_cast<int>(nodes_.size())};
  return push(std::move(out),
              [pred, res, targets, delta](Tape& t) {
                const double g = t.nodes_[res.id].grad.at(0, 0);
                const Matrix& vp = t.nodes_[pred.id].value;
                Matrix& gp = t.grad_ref(pred.id);
                const double inv_n = 1.0 / static_cast<double>(vp.data.size());
                for (std::size_t i = 0; i < vp.data.size(); ++i) {
                  const double e = vp.data[i] - targets.data[i];
                  gp.data[i] += g * inv_n * std::clamp(e, -delta, delta);
                }
              });
}

}  // namespace ssip::nn
