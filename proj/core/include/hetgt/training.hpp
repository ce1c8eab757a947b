// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetgt/checkpoint.hpp"
#include "hetgt/metrics.hpp"
#include "hetgt/models.hpp"

namespace hetgt {

enum class Precision { f32, f64 };
enum class StopMetric { val_loss, val_macro_f1 };

inline const char* precision_name(Precision p) {
  return p == Precision::f32 ? "f32" : "f64";
}
inline Precision parse_precision(std::string_view s) {
  if (s == "f32") return Precision::f32;
  if (s == "f64") return Precision::f64;
  throw ConfigError("unknown precision '" + std::string(s) + "'");
}

inline const char* stop_metric_name(StopMetric m) {
  return m == StopMetric::val_loss ? "val_loss" : "val_macro_f1";
}
inline StopMetric parse_stop_metric(std::string_view s) {
  if (s == "val_loss") return StopMetric::val_loss;
  if (s == "val_macro_f1") return StopMetric::val_macro_f1;
  throw ConfigError("unknown stop metric '" + std::string(s) + "'");
}

struct TrainConfig {
  double lr = 0.005;
  double weight_decay = 0.0;
  int max_epochs = 500;
  /// Number of consecutive non-improving epochs tolerated before stopping;
  /// 0 stops at the first epoch that fails to improve.
  int patience = 100;
  std::uint64_t seed = 0;
  Precision precision = Precision::f32;
  StopMetric stop_metric = StopMetric::val_loss;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (patience > max_epochs) {
      throw ConfigError("patience exceeds max_epochs; it could never trigger");
    }
  }
};

/// Mean cross entropy over the masked rows of `logits`, stabilized via
/// log-sum-exp. `labels` holds one class per logits row; `mask` selects the
/// rows entering the mean and fixes the accumulation order.
template <class S>
Tensor<S> cross_entropy_loss(Tape<S>& tp, const Tensor<S>& logits,
                             const std::vector<int>& labels,
                             const std::vector<std::uint32_t>& mask) {
  if (mask.empty()) throw ContractError("cross_entropy_loss: empty mask");
  if (labels.size() != logits.rows()) {
    throw DimensionError("cross_entropy_loss: one label per logits row");
  }
  const std::size_t C = logits.cols();
  if (C == 0) throw DimensionError("cross_entropy_loss: zero classes");

  auto probs = std::make_shared<std::vector<S>>(mask.size() * C);
  double total = 0.0;
  for (std::size_t mi = 0; mi < mask.size(); ++mi) {
    const std::size_t i = mask[mi];
    if (i >= logits.rows()) {
      throw RangeError("cross_entropy_loss: mask row " + std::to_string(i) +
                       " out of range");
    }
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw RangeError("cross_entropy_loss: label " + std::to_string(y) +
                       " outside [0," + std::to_string(C) + ")");
    }
    const S* row = logits.data() + i * C;
    S mx = row[0];
    for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, row[j]);
    S denom = S(0);
    S* prow = probs->data() + mi * C;
    for (std::size_t j = 0; j < C; ++j) {
      prow[j] = std::exp(row[j] - mx);
      denom += prow[j];
    }
    for (std::size_t j = 0; j < C; ++j) prow[j] /= denom;
    total += static_cast<double>(mx) + std::log(static_cast<double>(denom)) -
             static_cast<double>(row[static_cast<std::size_t>(y)]);
  }
  Tensor<S> out(1, 1);
  out.at(0, 0) = static_cast<S>(total / static_cast<double>(mask.size()));

  tp.record("cross_entropy", {&logits}, out,
            [logits, out, probs, mask_copy = mask, label_copy = labels, C]() {
              if (!logits.requires_grad()) return;
              const S g = out.grad()[0] / static_cast<S>(mask_copy.size());
              S* lg = logits.grad_data();
              for (std::size_t mi = 0; mi < mask_copy.size(); ++mi) {
                const std::size_t i = mask_copy[mi];
                const auto y = static_cast<std::size_t>(label_copy[i]);
                const S* prow = probs->data() + mi * C;
                for (std::size_t j = 0; j < C; ++j) {
                  lg[i * C + j] += g * (prow[j] - (j == y ? S(1) : S(0)));
                }
              }
            });
  return out;
}

/// Classic Adam with L2 regularization folded into the gradient
/// (g += weight_decay * p before the moment updates).
template <class S>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<std::vector<S>> m, v;  // aligned with the trainable list

  static AdamState init(
      const std::vector<std::pair<std::string, Tensor<S>>>& params) {
    AdamState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const auto& [name, t_] : params) {
      st.m.emplace_back(t_.size(), S(0));
      st.v.emplace_back(t_.size(), S(0));
    }
    return st;
  }
};

template <class S>
void adam_step(const std::vector<std::pair<std::string, Tensor<S>>>& params,
               AdamState<S>& st, double lr, double weight_decay) {
  if (st.m.size() != params.size()) {
    throw ContractError("adam_step: state does not match parameter list");
  }
  st.t += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor<S>& p = params[pi].second;
    S* x = p.data();
    const bool has_g = p.has_grad();
    const S* gr = has_g ? p.grad_data() : nullptr;
    S* m = st.m[pi].data();
    S* v = st.v[pi].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = (has_g ? static_cast<double>(gr[i]) : 0.0) +
                       weight_decay * static_cast<double>(x[i]);
      const double mn = st.beta1 * static_cast<double>(m[i]) + (1.0 - st.beta1) * g;
      const double vn = st.beta2 * static_cast<double>(v[i]) + (1.0 - st.beta2) * g * g;
      m[i] = static_cast<S>(mn);
      v[i] = static_cast<S>(vn);
      const double mhat = mn / bc1;
      const double vhat = vn / bc2;
      x[i] = static_cast<S>(static_cast<double>(x[i]) -
                            lr * mhat / (std::sqrt(vhat) + st.eps));
    }
  }
}

struct RunResult {
  std::uint64_t seed = 0;
  int best_epoch = 0;  // 1-based; 0 means no epoch ever improved
  int epochs_run = 0;
  std::vector<double> train_loss, val_loss;
  double test_macro_f1 = 0.0;
  double test_micro_f1 = 0.0;
  double ms_per_epoch = 0.0;
  bool diverged = false;
  std::string diagnostic;
  double best_val_metric = 0.0;
  std::vector<CheckpointEntry> params;  // weights of the kept epoch
};

namespace detail {

template <class S>
std::vector<int> argmax_rows(const Tensor<S>& logits,
                             const std::vector<std::uint32_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (const auto i : idx) {
    const S* row = logits.data() + static_cast<std::size_t>(i) * logits.cols();
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (row[j] > row[best]) best = j;
    }
    out.push_back(static_cast<int>(best));
  }
  return out;
}

template <class S>
RunResult train_impl(const ModelSpec& spec, const PreparedGraph<S>& prep,
                     const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (prep.train_idx.empty()) throw ContractError("training split is empty");
  if (prep.val_idx.empty()) throw ContractError("validation split is empty");

  ModelParams<S> params = init_params<S>(spec, prep.schema, cfg.seed);
  AdamState<S> opt = AdamState<S>::init(params.trainable);
  Rng drop = Rng::keyed(cfg.seed, "dropout");

  RunResult res;
  res.seed = cfg.seed;
  const bool minimize = cfg.stop_metric == StopMetric::val_loss;
  double best = minimize ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  std::vector<std::vector<S>> best_values;
  int since = 0;
  std::vector<double> epoch_ms;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Tape<S> tp;
      tp.set_check_finite(true);
      Tensor<S> logits = model_forward(tp, spec, params, prep, true, &drop);
      Tensor<S> loss =
          cross_entropy_loss(tp, logits, prep.labels, prep.train_idx);
      res.train_loss.push_back(static_cast<double>(loss.at(0, 0)));
      params.zero_grads();
      tp.backward(loss);
      adam_step(params.trainable, opt, cfg.lr, cfg.weight_decay);
    } catch (const NumericError& e) {
      res.diverged = true;
      res.diagnostic = std::string("epoch ") + std::to_string(epoch) + ": " +
                       e.what();
      break;
    }

    Tape<S> ev;
    ev.set_recording(false);
    Tensor<S> logits = model_forward(ev, spec, params, prep, false, nullptr);
    const double vl = static_cast<double>(
        cross_entropy_loss(ev, logits, prep.labels, prep.val_idx).at(0, 0));
    res.val_loss.push_back(vl);
    res.epochs_run = epoch;
    epoch_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count());
    if (!std::isfinite(vl)) {
      res.diverged = true;
      res.diagnostic =
          "epoch " + std::to_string(epoch) + ": validation loss is not finite";
      break;
    }

    double metric = vl;
    if (cfg.stop_metric == StopMetric::val_macro_f1) {
      std::vector<int> truth;
      truth.reserve(prep.val_idx.size());
      for (const auto i : prep.val_idx) truth.push_back(prep.labels[i]);
      metric = f1_scores(argmax_rows(logits, prep.val_idx), truth,
                         prep.schema.num_classes)
                   .macro;
    }
    const bool improved = minimize ? metric < best : metric > best;
    if (improved) {
      best = metric;
      res.best_epoch = epoch;
      since = 0;
      best_values.clear();
      for (const auto& [name, t] : params.trainable) {
        best_values.push_back(t.values());
      }
    } else if (++since > cfg.patience) {
      break;
    }
  }

  if (!best_values.empty()) {
    for (std::size_t i = 0; i < params.trainable.size(); ++i) {
      params.trainable[i].second.values() = best_values[i];
    }
    res.best_val_metric = best;
  }

  if (!prep.test_idx.empty()) {
    Tape<S> ev;
    ev.set_recording(false);
    Tensor<S> logits = model_forward(ev, spec, params, prep, false, nullptr);
    std::vector<int> truth;
    truth.reserve(prep.test_idx.size());
    for (const auto i : prep.test_idx) truth.push_back(prep.labels[i]);
    const F1 f1 = f1_scores(argmax_rows(logits, prep.test_idx), truth,
                            prep.schema.num_classes);
    res.test_macro_f1 = f1.macro;
    res.test_micro_f1 = f1.micro;
  }
  res.params = to_checkpoint(params.trainable);

  if (!epoch_ms.empty()) {
    // Skip warmup epochs (allocator and cache effects); keep at least one.
    const std::size_t skip =
        std::min<std::size_t>(5, epoch_ms.size() - 1);
    double sum = 0.0;
    for (std::size_t i = skip; i < epoch_ms.size(); ++i) sum += epoch_ms[i];
    res.ms_per_epoch = sum / static_cast<double>(epoch_ms.size() - skip);
  }
  return res;
}

}  // namespace detail

inline RunResult train(const ModelSpec& spec, const HeteroGraph& g,
                       const TrainConfig& cfg) {
  if (cfg.precision == Precision::f64) {
    const auto prep = PreparedGraph<double>::prepare(g);
    return detail::train_impl<double>(spec, prep, cfg);
  }
  const auto prep = PreparedGraph<float>::prepare(g);
  return detail::train_impl<float>(spec, prep, cfg);
}

struct MultiRunSummary {
  TrimmedStats macro_f1, micro_f1;
  double ms_per_epoch_mean = 0.0;
  std::size_t runs = 0;
  std::size_t best_run = 0;  // index into results, picked by best_val_metric
  bool any_diverged = false;
  std::vector<RunResult> results;
  std::vector<CheckpointEntry> best_params;
};

namespace detail {

template <class S>
MultiRunSummary multi_run_impl(const ModelSpec& spec,
                               const PreparedGraph<S>& prep,
                               const TrainConfig& cfg, int n_runs,
                               double trim) {
  MultiRunSummary sum;
  sum.runs = static_cast<std::size_t>(n_runs);
  std::vector<double> macros, micros;
  double ms = 0.0;
  for (int r = 0; r < n_runs; ++r) {
    TrainConfig rc = cfg;
    rc.seed = cfg.seed + static_cast<std::uint64_t>(r);
    RunResult res = train_impl<S>(spec, prep, rc);
    sum.any_diverged |= res.diverged;
    macros.push_back(res.test_macro_f1);
    micros.push_back(res.test_micro_f1);
    ms += res.ms_per_epoch;
    sum.results.push_back(std::move(res));
  }
  sum.macro_f1 = trimmed_stats(macros, trim);
  sum.micro_f1 = trimmed_stats(micros, trim);
  sum.ms_per_epoch_mean = ms / static_cast<double>(n_runs);

  const bool minimize = cfg.stop_metric == StopMetric::val_loss;
  bool found = false;
  for (std::size_t i = 0; i < sum.results.size(); ++i) {
    const RunResult& r = sum.results[i];
    if (r.diverged || r.best_epoch == 0) continue;
    if (!found ||
        (minimize ? r.best_val_metric < sum.results[sum.best_run].best_val_metric
                  : r.best_val_metric > sum.results[sum.best_run].best_val_metric)) {
      sum.best_run = i;
      found = true;
    }
  }
  sum.best_params = sum.results[sum.best_run].params;
  return sum;
}

}  // namespace detail

/// Trains `n_runs` times with seeds cfg.seed, cfg.seed+1, ... and reports
/// trimmed test-F1 statistics. Needs at least 5 runs for the trimmed
/// statistics to be meaningful.
inline MultiRunSummary multi_run(const ModelSpec& spec, const HeteroGraph& g,
                                 const TrainConfig& cfg, int n_runs,
                                 double trim = 0.1) {
  if (n_runs < 5) throw ContractError("multi_run: need at least 5 runs");
  if (cfg.precision == Precision::f64) {
    const auto prep = PreparedGraph<double>::prepare(g);
    return detail::multi_run_impl<double>(spec, prep, cfg, n_runs, trim);
  }
  const auto prep = PreparedGraph<float>::prepare(g);
  return detail::multi_run_impl<float>(spec, prep, cfg, n_runs, trim);
}

}  // namespace hetgt
