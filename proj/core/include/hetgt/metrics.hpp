// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "hetgt/errors.hpp"

namespace hetgt {

struct F1 {
  double macro = 0.0;
  double micro = 0.0;
};

/// Per-class F1 averaged over all `num_classes` declared classes (classes
/// absent from both predictions and truth contribute 0), plus micro F1
/// (global precision == recall == accuracy in single-label classification).
/// Per-class precision/recall/F1 treat 0/0 as 0.
F1 f1_scores(const std::vector<int>& pred, const std::vector<int>& truth,
             int num_classes);

struct TrimmedStats {
  double mean = 0.0;
  double stddev = 0.0;      // sample standard deviation (n-1)
  std::size_t used = 0;     // values remaining after trimming
};

/// Sorts, drops floor(n*trim) values from each end, and reports mean and
/// sample stddev of the rest. Requires at least one surviving value. When
/// every value is identical the result is exactly (value, 0).
TrimmedStats trimmed_stats(std::vector<double> values, double trim);

}  // namespace hetgt
