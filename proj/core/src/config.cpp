// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hetgt/experiment.hpp"

namespace hetgt {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

// get<T> with the failing key in the diagnostic.
template <class T>
T field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where +
                      ": " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, const std::string& where, T dflt) {
  if (!j.contains(key)) return dflt;
  return field<T>(j, key, where);
}

ModelSpec parse_model(const json& j) {
  reject_unknown(j,
                 {"kind", "depth", "hidden", "semantic_hidden", "aggregator",
                  "dropout", "projection_activation", "semantic_query_zero"},
                 "model");
  ModelSpec m;
  m.kind = parse_model_kind(field<std::string>(j, "kind", "model"));
  m.depth = field_or(j, "depth", "model", m.depth);
  m.hidden = field_or(j, "hidden", "model", m.hidden);
  m.semantic_hidden = field_or(j, "semantic_hidden", "model", m.semantic_hidden);
  if (j.contains("aggregator")) {
    m.aggregator = parse_aggregator(field<std::string>(j, "aggregator", "model"));
  } else if (m.kind == ModelKind::het_gtan_ns) {
    m.aggregator = AggregatorKind::none;
  }
  if (j.contains("dropout")) {
    const json& d = j.at("dropout");
    reject_unknown(d, {"projection", "layer", "attention"}, "model.dropout");
    m.dropout_projection = field_or(d, "projection", "model.dropout", 0.0);
    m.dropout_layer = field_or(d, "layer", "model.dropout", 0.0);
    m.dropout_attention = field_or(d, "attention", "model.dropout", 0.0);
  }
  if (j.contains("projection_activation")) {
    m.projection_activation =
        parse_act(field<std::string>(j, "projection_activation", "model"));
  }
  m.semantic_query_zero =
      field_or(j, "semantic_query_zero", "model", m.semantic_query_zero);
  return m;
}

TrainConfig parse_train(const json& j) {
  reject_unknown(j,
                 {"lr", "weight_decay", "max_epochs", "patience", "seed",
                  "precision", "stop_metric"},
                 "train");
  TrainConfig t;
  t.lr = field_or(j, "lr", "train", t.lr);
  t.weight_decay = field_or(j, "weight_decay", "train", t.weight_decay);
  t.max_epochs = field_or(j, "max_epochs", "train", t.max_epochs);
  t.patience = field_or(j, "patience", "train", t.patience);
  t.seed = field_or(j, "seed", "train", t.seed);
  if (j.contains("precision")) {
    t.precision = parse_precision(field<std::string>(j, "precision", "train"));
  }
  if (j.contains("stop_metric")) {
    t.stop_metric =
        parse_stop_metric(field<std::string>(j, "stop_metric", "train"));
  }
  return t;
}

SyntheticSpec parse_synthetic(const json& j) {
  reject_unknown(j,
                 {"node_types", "edge_types", "target_type", "num_classes",
                  "signal", "seed", "train_per_class", "val_per_class"},
                 "synthetic");
  SyntheticSpec s;
  for (const auto& n : j.at("node_types")) {
    reject_unknown(n, {"name", "count", "feature_dim"}, "synthetic.node_types");
    SyntheticSpec::NodeSpec ns;
    ns.name = field<std::string>(n, "name", "synthetic.node_types");
    ns.count = field<std::size_t>(n, "count", "synthetic.node_types");
    ns.feature_dim =
        field<std::size_t>(n, "feature_dim", "synthetic.node_types");
    s.node_types.push_back(std::move(ns));
  }
  for (const auto& e : j.at("edge_types")) {
    reject_unknown(e, {"name", "src", "dst", "expected_degree"},
                   "synthetic.edge_types");
    SyntheticSpec::EdgeSpec es;
    es.name = field<std::string>(e, "name", "synthetic.edge_types");
    es.src = field<std::string>(e, "src", "synthetic.edge_types");
    es.dst = field<std::string>(e, "dst", "synthetic.edge_types");
    es.expected_degree =
        field<double>(e, "expected_degree", "synthetic.edge_types");
    s.edge_types.push_back(std::move(es));
  }
  s.target_type = field<std::string>(j, "target_type", "synthetic");
  s.num_classes = field_or(j, "num_classes", "synthetic", s.num_classes);
  s.signal = field_or(j, "signal", "synthetic", s.signal);
  s.seed = field_or(j, "seed", "synthetic", s.seed);
  s.train_per_class =
      field_or(j, "train_per_class", "synthetic", s.train_per_class);
  s.val_per_class = field_or(j, "val_per_class", "synthetic", s.val_per_class);
  return s;
}

}  // namespace

ExperimentConfig parse_experiment_config_text(const std::string& text,
                                              const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + origin + "': " + e.what());
  }
  reject_unknown(
      j, {"model", "train", "dataset", "synthetic", "runs", "out", "depths"},
      origin);

  ExperimentConfig cfg;
  if (!j.contains("model")) {
    throw ConfigError("'" + origin + "' is missing the 'model' block");
  }
  cfg.model = parse_model(j.at("model"));
  if (j.contains("train")) cfg.train = parse_train(j.at("train"));
  if (j.contains("dataset")) {
    cfg.dataset_dir = field<std::string>(j, "dataset", origin);
  }
  if (j.contains("synthetic")) {
    try {
      cfg.synthetic = parse_synthetic(j.at("synthetic"));
    } catch (const json::exception& e) {
      throw ConfigError("bad 'synthetic' block in " + origin + ": " + e.what());
    }
  }
  cfg.runs = field_or(j, "runs", origin, cfg.runs);
  cfg.out_dir = field_or(j, "out", origin, cfg.out_dir);
  if (j.contains("depths")) {
    cfg.depths = field<std::vector<int>>(j, "depths", origin);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config_text(ss.str(), path);
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o) {
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.runs) cfg.runs = *o.runs;
  if (o.depth) cfg.model.depth = *o.depth;
  if (o.out) cfg.out_dir = *o.out;
  if (o.precision) cfg.train.precision = parse_precision(*o.precision);
  if (o.depths) cfg.depths = *o.depths;
  cfg.validate();
}

}  // namespace hetgt
