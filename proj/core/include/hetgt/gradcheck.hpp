// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hetgt/rng.hpp"
#include "hetgt/tape.hpp"

namespace hetgt {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst;  // "name(row,col)" of the largest relative error
  std::size_t coords_checked = 0;
};

/// Compares reverse-mode gradients against central finite differences.
///
/// `build_loss(tape)` must record the computation on the given tape and
/// return a 1x1 loss; it is re-invoked for every probe, so it must read the
/// current values of `params` each time. Relative error uses
/// |a - fd| / max(1, |a|, |fd|). At most `max_coords_per_param` coordinates
/// per parameter are probed, sampled from an RNG keyed by `seed`.
template <class F>
GradCheckReport grad_check(
    F&& build_loss,
    const std::vector<std::pair<std::string, Tensor<double>>>& params,
    double eps = 1e-5, std::size_t max_coords_per_param = 16,
    std::uint64_t seed = 0) {
  Tape<double> tape;
  tape.set_check_finite(true);
  Tensor<double> loss = build_loss(tape);
  for (const auto& [name, t] : params) t.clear_grad();
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, t] : params) analytic.push_back(t.grad());

  auto eval = [&]() {
    Tape<double> et;
    et.set_recording(false);
    return build_loss(et).at(0, 0);
  };

  Rng rng = Rng::keyed(seed, "gradcheck");
  GradCheckReport rep;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor<double>& t = params[pi].second;
    const std::size_t n = t.size();
    std::vector<std::size_t> coords;
    if (n <= max_coords_per_param) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      coords.reserve(max_coords_per_param);
      for (std::size_t i = 0; i < max_coords_per_param; ++i) {
        coords.push_back(rng.index(n));
      }
    }
    for (const std::size_t c : coords) {
      double* slot = t.data() + c;
      const double saved = *slot;
      *slot = saved + eps;
      const double lp = eval();
      *slot = saved - eps;
      const double lm = eval();
      *slot = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      const double a = analytic[pi][c];
      const double rel =
          std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
      ++rep.coords_checked;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst = params[pi].first + "(" + std::to_string(c / t.cols()) +
                    "," + std::to_string(c % t.cols()) + ")";
      }
    }
  }
  return rep;
}

}  // namespace hetgt
