// SPDX-License-Identifier: Apache-2.0
#include "hetgt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetgt {

F1 f1_scores(const std::vector<int>& pred, const std::vector<int>& truth,
             int num_classes) {
  if (pred.size() != truth.size()) {
    throw ContractError("f1_scores: prediction/truth length mismatch");
  }
  if (num_classes < 1) throw ContractError("f1_scores: need num_classes >= 1");
  if (pred.empty()) throw ContractError("f1_scores: empty inputs");

  const auto C = static_cast<std::size_t>(num_classes);
  std::vector<std::size_t> tp(C, 0), fp(C, 0), fn(C, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i], t = truth[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes) {
      throw RangeError("f1_scores: label " + std::to_string(p < 0 || p >= num_classes ? p : t) +
                       " outside [0," + std::to_string(num_classes) + ")");
    }
    if (p == t) {
      ++tp[static_cast<std::size_t>(p)];
      ++correct;
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(t)];
    }
  }

  double macro = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    const double denom_p = static_cast<double>(tp[c] + fp[c]);
    const double denom_r = static_cast<double>(tp[c] + fn[c]);
    const double prec = denom_p > 0 ? static_cast<double>(tp[c]) / denom_p : 0.0;
    const double rec = denom_r > 0 ? static_cast<double>(tp[c]) / denom_r : 0.0;
    macro += (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  macro /= static_cast<double>(C);

  F1 out;
  out.macro = macro;
  out.micro = static_cast<double>(correct) / static_cast<double>(pred.size());
  return out;
}

TrimmedStats trimmed_stats(std::vector<double> values, double trim) {
  if (!(trim >= 0.0 && trim < 0.5)) {
    throw ContractError("trimmed_stats: trim fraction must lie in [0, 0.5)");
  }
  if (values.empty()) throw ContractError("trimmed_stats: no values");
  std::sort(values.begin(), values.end());
  const std::size_t k =
      static_cast<std::size_t>(std::floor(static_cast<double>(values.size()) * trim));
  if (values.size() < 2 * k + 1) {
    throw ContractError("trimmed_stats: trimming would drop every value");
  }
  const std::size_t n = values.size() - 2 * k;

  TrimmedStats out;
  out.used = n;
  // All survivors equal: report the value itself, spread exactly zero.
  if (values[k] == values[k + n - 1]) {
    out.mean = values[k];
    out.stddev = 0.0;
    return out;
  }
  double sum = 0.0;
  for (std::size_t i = k; i < k + n; ++i) sum += values[i];
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (std::size_t i = k; i < k + n; ++i) {
      const double d = values[i] - out.mean;
      ss += d * d;
    }
    out.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return out;
}

}  // namespace hetgt
