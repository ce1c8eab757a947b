// SPDX-License-Identifier: Apache-2.0
#include "hetgt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#else
#include <thread>
#endif

namespace hetgt {

int max_threads() {
  static const int cached = [] {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = static_cast<int>(std::thread::hardware_concurrency());
#endif
    if (n < 1) n = 1;
    if (const char* env = std::getenv("HETGT_THREADS")) {
      try {
        const int cap = std::stoi(env);
        if (cap >= 1) n = std::min(n, cap);
      } catch (...) {
        // unparseable value: ignore, keep hardware default
      }
    }
    return n;
  }();
  return cached;
}

}  // namespace hetgt
