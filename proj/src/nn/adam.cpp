// src/nn/adam.cpp

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

#include "ssip/nn/adam.hpp"

#include <cmath>

namespace ssip::nn {

double Adam::step(const std::vector<Param*>& params, const Binder& binder,
                  double lr) {
  // Gather gradients once; iteration order is the caller's canonical
  // parameter order, which keeps the clip-norm sum deterministic.
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  double norm_sq = 0.0;
  for (Param* p : params) {
    grads.push_back(binder.gradient(*p));
    for (double g : grads.back().data) {
      norm_sq += g * g;
    }
  }
  const double norm = std::sqrt(norm_sq);
  double scale = 1.0;
  if (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) {
    scale = cfg_.clip_norm / norm;
  }

  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_count_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    const Matrix& g = grads[i];
    for (std::size_t j = 0; j < p.value.data.size(); ++j) {
      const double gj = g.data[j] * scale;
      p.adam_m.data[j] = cfg_.beta1 * p.adam_m.data[j] + (1.0 - cfg_.beta1) * gj;
      p.adam_v.data[j] =
          cfg_.beta2 * p.adam_v.data[j] + (1.0 - cfg_.beta2) * gj * gj;
      const double m_hat = p.adam_m.data[j] / bc1;
      const double v_hat = p.adam_v.data[j] / bc2;
      p.value.data[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
  return norm;
}

}  // namespace ssip::nn
