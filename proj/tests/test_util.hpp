// tests/test_util.hpp

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

#ifndef SSIP_TESTS_TEST_UTIL_HPP_
#define SSIP_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "ssip/nn/matrix.hpp"
#include "ssip/rng.hpp"
#include "ssip/signal.hpp"

namespace ssip::test {

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

/// Gradient comparison with an absolute floor: central differences bottom
/// out around 1e-9 of the function scale, so a truly-zero analytic gradient
/// must not be compared purely relatively.
inline bool grad_close(double analytic, double numeric, double rtol,
                       double atol = 1e-7) {
  return std::abs(analytic - numeric) <=
         atol + rtol * std::max(std::abs(analytic), std::abs(numeric));
}

/// Central finite differences of a scalar function w.r.t. every entry of x.
/// f() must read x by reference (the perturbation happens in place).
template <typename F>
nn::Matrix finite_diff(F&& f, nn::Matrix& x, double step = 1e-5) {
  nn::Matrix grad(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double orig = x.data[i];
    x.data[i] = orig + step;
    const double up = f();
    x.data[i] = orig - step;
    const double down = f();
    x.data[i] = orig;
    grad.data[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline nn::Matrix random_matrix(int rows, int cols, SeededRng& rng,
                                double scale = 1.0) {
  nn::Matrix m(rows, cols);
  for (auto& v : m.data) v = rng.normal(0.0, scale);
  return m;
}

/// Sine test signal with optional additive offset per sample.
inline Waveform make_sine(double amplitude, double frequency_hz,
                          int sample_rate, double seconds,
                          double phase = 0.0) {
  Waveform w;
  w.sample_rate = sample_rate;
  const int n = static_cast<int>(sample_rate * seconds);
  w.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * 3.14159265358979323846 *
                                            frequency_hz * i / sample_rate +
                                        phase);
  }
  return w;
}

/// Fresh scratch directory under the build tree.
inline std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ssip_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace ssip::test

#endif  // SSIP_TESTS_TEST_UTIL_HPP_
