// src/spm.cpp

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

#include "ssip/spm.hpp"

#include <algorithm>
#include <numeric>

#include "ssip/errors.hpp"

namespace ssip {

void SupportSet::validate() const {
  if (embeddings.empty()) {
    throw EmptySupport("support set is empty");
  }
  const auto& first = embeddings.front();
  for (const auto& e : embeddings) {
    if (e.listener_id != first.listener_id) {
      throw FormatError("support set mixes listeners '" + first.listener_id +
                        "' and '" + e.listener_id + "'");
    }
    if (e.dim() != first.dim()) {
      throw ShapeError("support embeddings have mixed widths " +
                       std::to_string(first.dim()) + " and " +
                       std::to_string(e.dim()));
    }
  }
}

std::vector<double> aggregate_support(const SupportSet& s) {
  s.validate();
  const int d = s.embeddings.front().dim();
  const std::size_t n = s.embeddings.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&s](std::size_t a, std::size_t b) {
    return s.embeddings[a].sample_id < s.embeddings[b].sample_id;
  });

  std::vector<double> sum(d, 0.0);
  for (std::size_t idx : order) {
    const auto& v = s.embeddings[idx].vector;
    for (int j = 0; j < d; ++j) {
      sum[j] += v[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& x : sum) x *= inv;
  return sum;
}

double clamp_score(double raw) { return std::clamp(raw, 0.0, 100.0); }

Prediction predict_query(const std::vector<double>& aggregate,
                         const Embedding& query, const nn::Matrix& weight,
                         const nn::Matrix& bias) {
  const int d = query.dim();
  if (static_cast<int>(aggregate.size()) != d) {
    throw ShapeError("aggregate width " + std::to_string(aggregate.size()) +
                     " does not match query width " + std::to_string(d));
  }
  if (weight.rows != 2 * d || weight.cols != 1 || bias.rows != 1 ||
      bias.cols != 1) {
    throw ShapeError("prediction head expects a (2*" + std::to_string(d) +
                     " x 1) weight and (1 x 1) bias");
  }
  double acc = bias.at(0, 0);
  for (int j = 0; j < d; ++j) {
    acc += aggregate[j] * weight.at(j, 0);
  }
  for (int j = 0; j < d; ++j) {
    acc += query.vector[j] * weight.at(d + j, 0);
  }
  Prediction p;
  p.sample_id = query.sample_id;
  p.listener_id = query.listener_id;
  p.predicted_score = acc;
  p.reported_score = clamp_score(acc);
  return p;
}

}  // namespace ssip
