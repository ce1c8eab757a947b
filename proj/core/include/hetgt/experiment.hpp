// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetgt/metrics.hpp"
#include "hetgt/models.hpp"
#include "hetgt/synthetic.hpp"
#include "hetgt/training.hpp"

namespace hetgt {

struct ExperimentConfig {
  std::optional<std::string> dataset_dir;
  std::optional<SyntheticSpec> synthetic;
  ModelSpec model;
  TrainConfig train;
  int runs = 10;
  std::string out_dir = "results";
  std::vector<int> depths = {2, 5, 10, 20};

  void validate() const {
    if (dataset_dir.has_value() == synthetic.has_value()) {
      throw ConfigError(
          "config must name exactly one graph source: 'dataset' or "
          "'synthetic'");
    }
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (depths.empty()) throw ConfigError("depths must be non-empty");
    for (const int d : depths) {
      if (d < 1) throw ConfigError("depths entries must be >= 1");
    }
    model.validate();
    train.validate();
    if (synthetic) synthetic->validate();
  }
};

/// Parses the JSON experiment config; unknown keys anywhere are rejected
/// with a ConfigError naming the key.
ExperimentConfig parse_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config_text(const std::string& text,
                                              const std::string& origin);

/// Flag-level overrides (flag > file > default).
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> depth;
  std::optional<std::string> out;
  std::optional<std::string> precision;
  std::optional<std::vector<int>> depths;
};
void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o);

HeteroGraph load_experiment_graph(const ExperimentConfig& cfg);

/// One grid cell of an experiment: a model/depth/aggregator combination
/// with trimmed test-F1 statistics across seeds.
struct ResultRow {
  std::string model;
  int depth = 0;
  std::string aggregator;
  TrimmedStats macro_f1, micro_f1;
  double ms_per_epoch = 0.0;
  bool any_diverged = false;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
};

std::string results_table_csv(const ResultsTable& table);

/// Exit codes shared by the command entry points: 0 success, 2 config
/// error, 3 data error, 4 numerical divergence. The cmd_* functions return
/// the code directly for divergence and let config/data errors propagate as
/// exceptions for the caller to map.
int cmd_train(const ExperimentConfig& cfg);
int cmd_depth_sweep(const ExperimentConfig& cfg);
int cmd_ablation(const ExperimentConfig& cfg);
int cmd_gen_synthetic(const ExperimentConfig& cfg);
int cmd_gradcheck(bool inject_backward_fault = false);

}  // namespace hetgt
