// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hetgt/graph.hpp"

// Depth-0 oracle: multinomial logistic regression on the raw target-node
// features, trained by plain full-batch gradient descent. Shares no code
// with the library's tensor ops, models, or metrics.

namespace probe {

struct ProbeResult {
  double test_macro_f1 = 0.0;
  double test_accuracy = 0.0;
};

inline double macro_f1(const std::vector<int>& pred,
                       const std::vector<int>& truth, int num_classes) {
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    total += (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return total / num_classes;
}

inline ProbeResult linear_probe(const hetgt::HeteroGraph& g, int iters = 400,
                                double lr = 0.5) {
  const std::size_t tt = g.schema.target_type;
  const std::size_t d = g.schema.node_types[tt].feature_dim;
  const int C = g.schema.num_classes;
  const auto& feats = g.features[tt];

  // Standardize features over the training split.
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (const auto i : g.splits.train) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += feats[i * d + j];
  }
  for (std::size_t j = 0; j < d; ++j) mean[j] /= double(g.splits.train.size());
  for (const auto i : g.splits.train) {
    for (std::size_t j = 0; j < d; ++j) {
      const double v = feats[i * d + j] - mean[j];
      sd[j] += v * v;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    sd[j] = std::sqrt(sd[j] / double(g.splits.train.size()));
    if (sd[j] < 1e-12) sd[j] = 1.0;
  }
  auto x_at = [&](std::size_t i, std::size_t j) {
    return (double(feats[i * d + j]) - mean[j]) / sd[j];
  };

  std::vector<double> w(d * C, 0.0), b(C, 0.0);
  const auto& tr = g.splits.train;
  std::vector<double> logits(C), p(C);
  std::vector<double> gw(d * C), gb(C);
  for (int it = 0; it < iters; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (const auto i : tr) {
      double mx = -1e300;
      for (int c = 0; c < C; ++c) {
        double s = b[c];
        for (std::size_t j = 0; j < d; ++j) s += x_at(i, j) * w[j * C + c];
        logits[c] = s;
        mx = std::max(mx, s);
      }
      double denom = 0.0;
      for (int c = 0; c < C; ++c) denom += (p[c] = std::exp(logits[c] - mx));
      for (int c = 0; c < C; ++c) {
        const double gc = p[c] / denom - (g.labels[i] == c ? 1.0 : 0.0);
        gb[c] += gc;
        for (std::size_t j = 0; j < d; ++j) gw[j * C + c] += gc * x_at(i, j);
      }
    }
    const double scale = lr / double(tr.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= scale * gw[k];
    for (int c = 0; c < C; ++c) b[c] -= scale * gb[c];
  }

  std::vector<int> pred, truth;
  std::size_t correct = 0;
  for (const auto i : g.splits.test) {
    int best = 0;
    double bv = -1e300;
    for (int c = 0; c < C; ++c) {
      double s = b[c];
      for (std::size_t j = 0; j < d; ++j) s += x_at(i, j) * w[j * C + c];
      if (s > bv) {
        bv = s;
        best = c;
      }
    }
    pred.push_back(best);
    truth.push_back(g.labels[i]);
    correct += best == g.labels[i];
  }
  ProbeResult r;
  r.test_macro_f1 = macro_f1(pred, truth, C);
  r.test_accuracy = g.splits.test.empty()
                        ? 0.0
                        : double(correct) / double(g.splits.test.size());
  return r;
}

}  // namespace probe
