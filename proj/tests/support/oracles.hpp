// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

// Reference implementations kept deliberately dumb and independent of the
// library's kernels.

namespace oracle {

inline std::vector<double> matmul(const std::vector<double>& a, std::size_t m,
                                  std::size_t k, const std::vector<double>& b,
                                  std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

template <class A, class B>
double max_abs_diff(const A& a, const B& b) {
  double mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    if (d > mx) mx = d;
  }
  return mx;
}

}  // namespace oracle
