// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetgt/graph.hpp"
#include "hetgt/layers.hpp"
#include "hetgt/rng.hpp"

namespace hetgt {

enum class ModelKind { het_gtcn, het_gtan, het_gtan_ns, het_gcn, het_gat };
enum class AggregatorKind { semantic, mean, weighted_sum, none };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::het_gtcn: return "het_gtcn";
    case ModelKind::het_gtan: return "het_gtan";
    case ModelKind::het_gtan_ns: return "het_gtan_ns";
    case ModelKind::het_gcn: return "het_gcn";
    case ModelKind::het_gat: return "het_gat";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "het_gtcn") return ModelKind::het_gtcn;
  if (s == "het_gtan") return ModelKind::het_gtan;
  if (s == "het_gtan_ns") return ModelKind::het_gtan_ns;
  if (s == "het_gcn") return ModelKind::het_gcn;
  if (s == "het_gat") return ModelKind::het_gat;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

inline const char* aggregator_name(AggregatorKind a) {
  switch (a) {
    case AggregatorKind::semantic: return "semantic";
    case AggregatorKind::mean: return "mean";
    case AggregatorKind::weighted_sum: return "weighted_sum";
    case AggregatorKind::none: return "none";
  }
  return "?";
}

inline AggregatorKind parse_aggregator(std::string_view s) {
  if (s == "semantic") return AggregatorKind::semantic;
  if (s == "mean") return AggregatorKind::mean;
  if (s == "weighted_sum") return AggregatorKind::weighted_sum;
  if (s == "none") return AggregatorKind::none;
  throw ConfigError("unknown aggregator '" + std::string(s) + "'");
}

struct ModelSpec {
  ModelKind kind = ModelKind::het_gtan;
  int depth = 2;
  int hidden = 64;
  int semantic_hidden = 128;
  AggregatorKind aggregator = AggregatorKind::semantic;
  double dropout_projection = 0.0;
  double dropout_layer = 0.0;
  double dropout_attention = 0.0;
  Act projection_activation = Act::elu;
  /// Freeze the semantic query at zero and keep it out of the trainable
  /// set; semantic attention then stays exactly uniform (ablation aid).
  bool semantic_query_zero = false;

  bool tree_family() const {
    return kind == ModelKind::het_gtcn || kind == ModelKind::het_gtan ||
           kind == ModelKind::het_gtan_ns;
  }
  bool conv_family() const { return !tree_family(); }
  bool has_edge_attention() const {
    return kind == ModelKind::het_gtan || kind == ModelKind::het_gtan_ns ||
           kind == ModelKind::het_gat;
  }

  void validate() const {
    if (depth < 1) throw ConfigError("model depth must be >= 1");
    if (hidden < 1) throw ConfigError("hidden width must be >= 1");
    if (semantic_hidden < 1) throw ConfigError("semantic width must be >= 1");
    auto rate = [](double r, const char* what) {
      if (!(r >= 0.0 && r < 1.0)) {
        throw ConfigError(std::string(what) + " dropout must lie in [0,1)");
      }
    };
    rate(dropout_projection, "projection");
    rate(dropout_layer, "layer");
    rate(dropout_attention, "attention");
    if (kind == ModelKind::het_gtan_ns) {
      if (aggregator != AggregatorKind::none) {
        throw ConfigError(
            "het_gtan_ns sums edge-type messages directly; aggregator must be "
            "'none'");
      }
    } else if (aggregator == AggregatorKind::none) {
      throw ConfigError("aggregator 'none' is only valid for het_gtan_ns");
    }
  }
};

/// Graph lowered for one compute precision: per-type feature tensors,
/// per-edge-type contexts (behind stable pointers: tapes reference them, so
/// the PreparedGraph must outlive any tape recorded against it), incoming
/// edge-type lists, and split/label copies.
template <class S>
struct PreparedGraph {
  Schema schema;
  std::size_t n_global = 0;
  std::size_t target_type = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::vector<Tensor<S>> features;
  std::vector<std::shared_ptr<const EdgeTypeContext>> edges;
  std::vector<std::vector<std::size_t>> incoming;  // per node type
  std::vector<int> labels;
  std::vector<std::uint32_t> train_idx, val_idx, test_idx;

  static PreparedGraph prepare(const HeteroGraph& g) {
    g.validate_structure();
    PreparedGraph p;
    p.schema = g.schema;
    p.n_global = g.schema.total_nodes();
    p.target_type = g.schema.target_type;
    const std::size_t T = g.schema.node_types.size();
    p.ranges.reserve(T);
    p.features.reserve(T);
    for (std::size_t a = 0; a < T; ++a) {
      p.ranges.push_back(g.schema.type_range(a));
      const auto& nt = g.schema.node_types[a];
      Tensor<S> x(nt.count, nt.feature_dim);
      for (std::size_t i = 0; i < g.features[a].size(); ++i) {
        x.data()[i] = static_cast<S>(g.features[a][i]);
      }
      p.features.push_back(std::move(x));
    }
    p.incoming.resize(T);
    for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
      p.edges.push_back(
          std::make_shared<const EdgeTypeContext>(build_edge_context(g, k)));
      p.incoming[g.schema.edge_types[k].dst_type].push_back(k);
    }
    p.labels.assign(g.labels.begin(), g.labels.end());
    p.train_idx = g.splits.train;
    p.val_idx = g.splits.val;
    p.test_idx = g.splits.test;
    return p;
  }

  /// Copy sharing all structure, with `delta` added to every raw feature
  /// coordinate of one node.
  PreparedGraph with_feature_delta(std::size_t global_id, double delta) const {
    if (global_id >= n_global) {
      throw RangeError("perturb node " + std::to_string(global_id) +
                       " out of range");
    }
    PreparedGraph p = *this;
    for (std::size_t a = 0; a < ranges.size(); ++a) {
      const auto [b, e] = ranges[a];
      if (global_id < b || global_id >= e) continue;
      p.features[a] = features[a].clone();
      const std::size_t local = global_id - b;
      const std::size_t d = p.features[a].cols();
      for (std::size_t j = 0; j < d; ++j) {
        p.features[a].at(local, j) += static_cast<S>(delta);
      }
      break;
    }
    return p;
  }
};

template <class S>
struct ModelParams {
  std::vector<Tensor<S>> proj_w, proj_b;               // per node type
  std::vector<std::vector<Tensor<S>>> att;             // [layer][edge type]
  std::vector<Tensor<S>> conv_w;                       // [layer]
  std::vector<std::vector<Tensor<S>>> sem_q, sem_w, sem_b;  // [layer][node type]
  std::vector<Tensor<S>> theta;                        // [layer], K x 1
  Tensor<S> out_w, out_b;
  /// Canonical trainable list: projection, layers ascending (conv W,
  /// attention per edge, semantic per type, theta), output head. Optimizer
  /// state and checkpoints are keyed on this order and these names.
  std::vector<std::pair<std::string, Tensor<S>>> trainable;

  void zero_grads() const {
    for (const auto& [name, t] : trainable) t.clear_grad();
  }
};

/// Glorot-uniform parameter initialization. Each parameter draws from an
/// RNG keyed by (seed, parameter name), so shared parameters are identical
/// across model variants that differ only in extra parameter groups.
template <class S>
ModelParams<S> init_params(const ModelSpec& spec, const Schema& schema,
                           std::uint64_t seed) {
  spec.validate();
  ModelParams<S> p;
  auto glorot = [&](std::size_t rows, std::size_t cols, const std::string& name) {
    Tensor<S> t(rows, cols, true);
    Rng rng = Rng::keyed(seed, name);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (std::size_t i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
    p.trainable.emplace_back(name, t);
    return t;
  };
  auto zeros = [&](std::size_t rows, std::size_t cols, const std::string& name) {
    Tensor<S> t(rows, cols, true);
    p.trainable.emplace_back(name, t);
    return t;
  };

  const auto f = static_cast<std::size_t>(spec.hidden);
  const auto fp = static_cast<std::size_t>(spec.semantic_hidden);
  for (const auto& nt : schema.node_types) {
    p.proj_w.push_back(glorot(nt.feature_dim, f, "proj/W/" + nt.name));
    p.proj_b.push_back(zeros(1, f, "proj/b/" + nt.name));
  }
  for (int t = 1; t <= spec.depth; ++t) {
    const std::string prefix = "layer" + std::to_string(t) + "/";
    if (spec.conv_family()) {
      p.conv_w.push_back(glorot(f, f, prefix + "conv/W"));
    }
    if (spec.has_edge_attention()) {
      std::vector<Tensor<S>> row;
      for (const auto& et : schema.edge_types) {
        row.push_back(glorot(2 * f, 1, prefix + "att/" + et.name));
      }
      p.att.push_back(std::move(row));
    }
    if (spec.aggregator == AggregatorKind::semantic) {
      std::vector<Tensor<S>> qs(schema.node_types.size());
      std::vector<Tensor<S>> ws(schema.node_types.size());
      std::vector<Tensor<S>> bs(schema.node_types.size());
      for (std::size_t a = 0; a < schema.node_types.size(); ++a) {
        if (schema.incoming_edge_types(a) == 0) continue;
        const std::string& tn = schema.node_types[a].name;
        ws[a] = glorot(f, fp, prefix + "sem/W/" + tn);
        if (spec.semantic_query_zero) {
          qs[a] = Tensor<S>(fp, 1, false);  // frozen at zero, not trainable
        } else {
          qs[a] = glorot(fp, 1, prefix + "sem/q/" + tn);
        }
        bs[a] = zeros(1, fp, prefix + "sem/b/" + tn);
      }
      p.sem_q.push_back(std::move(qs));
      p.sem_w.push_back(std::move(ws));
      p.sem_b.push_back(std::move(bs));
    }
    if (spec.aggregator == AggregatorKind::weighted_sum) {
      Tensor<S> th(schema.edge_types.size(), 1, true);
      for (std::size_t k = 0; k < schema.edge_types.size(); ++k) {
        const std::size_t ka =
            schema.incoming_edge_types(schema.edge_types[k].dst_type);
        th.data()[k] = S(1) / static_cast<S>(ka);
      }
      p.trainable.emplace_back(prefix + "theta", th);
      p.theta.push_back(std::move(th));
    }
  }
  p.out_w = glorot(f, schema.num_classes, "out/W");
  p.out_b = zeros(1, schema.num_classes, "out/b");
  return p;
}

/// Full model forward pass: logits over target-type nodes.
///
/// Tree family anchors every layer's self term on the projected features Z;
/// conv family feeds layer 1 with Z and anchors on the evolving hidden
/// state. Layer dropout applies after intermediate layers only; projection
/// dropout applies once to Z. `rng` is required when training with any
/// nonzero dropout rate.
template <class S>
Tensor<S> model_forward(Tape<S>& tp, const ModelSpec& spec,
                        const ModelParams<S>& params, const PreparedGraph<S>& g,
                        bool train, Rng* rng) {
  const std::size_t T = g.schema.node_types.size();
  const bool wants_dropout =
      train && (spec.dropout_projection > 0.0 || spec.dropout_layer > 0.0 ||
                spec.dropout_attention > 0.0);
  if (wants_dropout && !rng) {
    throw ContractError("training forward with dropout needs an RNG");
  }

  Tensor<S> z = project_features(tp, g.features, params.proj_w, params.proj_b,
                                 spec.projection_activation);
  if (train && spec.dropout_projection > 0.0) {
    z = dropout(tp, z, spec.dropout_projection, *rng, true);
  }
  Tensor<S> h = z;

  for (int t = 1; t <= spec.depth; ++t) {
    std::vector<Tensor<S>> hk(g.edges.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const auto& ctx = *g.edges[k];
      try {
        switch (spec.kind) {
          case ModelKind::het_gtcn:
            hk[k] = gtcn_edge_forward(tp, h, z, ctx);
            break;
          case ModelKind::het_gtan:
            hk[k] = gtan_edge_forward(tp, h, z, params.att[t - 1][k], ctx,
                                      spec.dropout_attention, rng, train);
            break;
          case ModelKind::het_gtan_ns:
            hk[k] = gtan_edge_preact(tp, h, z, params.att[t - 1][k], ctx,
                                     spec.dropout_attention, rng, train);
            break;
          case ModelKind::het_gcn:
            hk[k] = gcn_edge_forward(tp, h, params.conv_w[t - 1], ctx);
            break;
          case ModelKind::het_gat:
            hk[k] = gat_edge_forward(tp, h, params.conv_w[t - 1],
                                     params.att[t - 1][k], ctx,
                                     spec.dropout_attention, rng, train);
            break;
        }
      } catch (const NumericError& e) {
        throw NumericError("layer " + std::to_string(t) + ", edge type '" +
                           ctx.name + "': " + e.what());
      }
    }

    std::vector<Tensor<S>> blocks;
    blocks.reserve(T);
    for (std::size_t a = 0; a < T; ++a) {
      const auto [rb, re] = g.ranges[a];
      const auto& inc = g.incoming[a];
      if (inc.empty()) {
        // No incoming edge types: state carries forward unchanged.
        blocks.push_back(slice_rows(tp, h, rb, re));
        continue;
      }
      std::vector<Tensor<S>> kb;
      kb.reserve(inc.size());
      for (const auto k : inc) kb.push_back(slice_rows(tp, hk[k], rb, re));
      Tensor<S> agg;
      try {
        if (spec.kind == ModelKind::het_gtan_ns) {
          agg = kb[0];
          for (std::size_t i = 1; i < kb.size(); ++i) agg = add(tp, agg, kb[i]);
          agg = activation(tp, agg, Act::elu);
        } else {
          switch (spec.aggregator) {
            case AggregatorKind::semantic:
              agg = semantic_aggregate(tp, kb, params.sem_q[t - 1][a],
                                       params.sem_w[t - 1][a],
                                       params.sem_b[t - 1][a]);
              break;
            case AggregatorKind::mean:
              agg = mean_aggregate(tp, kb);
              break;
            case AggregatorKind::weighted_sum: {
              std::vector<Tensor<S>> th;
              th.reserve(inc.size());
              for (const auto k : inc) {
                th.push_back(slice_rows(tp, params.theta[t - 1], k, k + 1));
              }
              agg = weighted_sum_aggregate(tp, kb, th);
              break;
            }
            case AggregatorKind::none:
              throw ContractError("aggregator 'none' outside het_gtan_ns");
          }
          if (spec.conv_family()) agg = activation(tp, agg, Act::relu);
        }
      } catch (const NumericError& e) {
        throw NumericError("layer " + std::to_string(t) + ", node type '" +
                           g.schema.node_types[a].name + "': " + e.what());
      }
      if (train && spec.dropout_layer > 0.0 && t < spec.depth) {
        agg = dropout(tp, agg, spec.dropout_layer, *rng, true);
      }
      blocks.push_back(agg);
    }
    h = concat_rows(tp, blocks);
  }

  const auto [tb, te] = g.ranges[g.target_type];
  return output_head(tp, slice_rows(tp, h, tb, te), params.out_w, params.out_b);
}

/// Max |logit change| at `target_gid` after adding `delta` to every raw
/// feature coordinate of `perturb_gid`, dropout off. Exactly zero whenever
/// the perturbed node lies outside the model's receptive field: untouched
/// inputs reproduce bit-identical folds. With the mean, weighted-sum, or
/// plain-sum aggregation the receptive field is the L-hop neighborhood;
/// semantic attention widens it to the whole node type once a type has two
/// or more incoming edge types, because the mixture weights average over
/// every node of the type (with one incoming edge type the softmax over a
/// single score is identically 1 and locality is again exact).
template <class S>
double receptive_field_probe(const ModelSpec& spec, const ModelParams<S>& params,
                             const PreparedGraph<S>& g, std::size_t target_gid,
                             std::size_t perturb_gid, double delta) {
  const auto [tb, te] = g.ranges[g.target_type];
  if (target_gid < tb || target_gid >= te) {
    throw RangeError("probe target must be a target-type node");
  }
  Tape<S> base_tape;
  base_tape.set_recording(false);
  Tensor<S> base = model_forward(base_tape, spec, params, g, false, nullptr);
  const PreparedGraph<S> moved_g = g.with_feature_delta(perturb_gid, delta);
  Tape<S> moved_tape;
  moved_tape.set_recording(false);
  Tensor<S> moved = model_forward(moved_tape, spec, params, moved_g, false, nullptr);

  const std::size_t row = target_gid - tb;
  double mx = 0.0;
  for (std::size_t j = 0; j < base.cols(); ++j) {
    mx = std::max(mx, std::abs(static_cast<double>(moved.at(row, j)) -
                               static_cast<double>(base.at(row, j))));
  }
  return mx;
}

}  // namespace hetgt
