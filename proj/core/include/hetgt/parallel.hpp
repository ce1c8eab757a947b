// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace hetgt {

/// Upper bound on kernel threads: min(hardware, $HETGT_THREADS if set >= 1).
/// Resolved once per process.
int max_threads();

/// True when it is worth spinning up a parallel region for `work` units.
inline bool parallel_worth(std::size_t work) {
  return max_threads() > 1 && work >= 1u << 15;
}

}  // namespace hetgt
