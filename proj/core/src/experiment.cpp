// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <nlohmann/json.hpp>

#include "hetgt/dataset_io.hpp"
#include "hetgt/experiment.hpp"
#include "hetgt/fixture.hpp"
#include "hetgt/gradcheck.hpp"

namespace hetgt {

namespace {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

json stats_json(const TrimmedStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"used", s.used}};
}

json model_json(const ModelSpec& m) {
  return {{"kind", model_kind_name(m.kind)},
          {"depth", m.depth},
          {"hidden", m.hidden},
          {"semantic_hidden", m.semantic_hidden},
          {"aggregator", aggregator_name(m.aggregator)},
          {"dropout",
           {{"projection", m.dropout_projection},
            {"layer", m.dropout_layer},
            {"attention", m.dropout_attention}}},
          {"projection_activation", act_name(m.projection_activation)},
          {"semantic_query_zero", m.semantic_query_zero}};
}

json run_json(const RunResult& r) {
  return {{"seed", r.seed},
          {"best_epoch", r.best_epoch},
          {"epochs_run", r.epochs_run},
          {"train_loss", r.train_loss},
          {"val_loss", r.val_loss},
          {"test_macro_f1", r.test_macro_f1},
          {"test_micro_f1", r.test_micro_f1},
          {"ms_per_epoch", r.ms_per_epoch},
          {"diverged", r.diverged},
          {"diagnostic", r.diagnostic},
          {"best_val_metric", r.best_val_metric}};
}

json row_json(const ResultRow& r) {
  return {{"model", r.model},
          {"depth", r.depth},
          {"aggregator", r.aggregator},
          {"macro_f1", stats_json(r.macro_f1)},
          {"micro_f1", stats_json(r.micro_f1)},
          {"ms_per_epoch", r.ms_per_epoch},
          {"any_diverged", r.any_diverged}};
}

ResultRow summarize_row(const ModelSpec& m, const MultiRunSummary& s) {
  ResultRow row;
  row.model = model_kind_name(m.kind);
  row.depth = m.depth;
  row.aggregator = aggregator_name(m.aggregator);
  row.macro_f1 = s.macro_f1;
  row.micro_f1 = s.micro_f1;
  row.ms_per_epoch = s.ms_per_epoch_mean;
  row.any_diverged = s.any_diverged;
  return row;
}

}  // namespace

HeteroGraph load_experiment_graph(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.dataset_dir) return load_dataset(*cfg.dataset_dir);
  return generate_synthetic(*cfg.synthetic);
}

std::string results_table_csv(const ResultsTable& table) {
  std::string out =
      "model,depth,aggregator,macro_f1_mean,macro_f1_std,micro_f1_mean,"
      "micro_f1_std,ms_per_epoch\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%.6f,%.6f,%.6f,%.6f,%.3f\n",
                  r.model.c_str(), r.depth, r.aggregator.c_str(),
                  r.macro_f1.mean, r.macro_f1.stddev, r.micro_f1.mean,
                  r.micro_f1.stddev, r.ms_per_epoch);
    out += buf;
  }
  return out;
}

int cmd_train(const ExperimentConfig& cfg) {
  const HeteroGraph g = load_experiment_graph(cfg);
  const MultiRunSummary sum = multi_run(cfg.model, g, cfg.train, cfg.runs);

  const std::filesystem::path out(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + out.string() + "'");

  std::string jsonl;
  for (const auto& r : sum.results) jsonl += run_json(r).dump() + "\n";
  write_text_file(out / "runs.jsonl", jsonl);

  // Metrics only: byte-identical across repeat invocations of one config.
  json summary = {{"model", model_json(cfg.model)},
                  {"runs", cfg.runs},
                  {"seed", cfg.train.seed},
                  {"precision", precision_name(cfg.train.precision)},
                  {"stop_metric", stop_metric_name(cfg.train.stop_metric)},
                  {"macro_f1", stats_json(sum.macro_f1)},
                  {"micro_f1", stats_json(sum.micro_f1)},
                  {"best_run", sum.best_run},
                  {"any_diverged", sum.any_diverged}};
  write_text_file(out / "summary.json", summary.dump(2) + "\n");

  json timing = {{"ms_per_epoch_mean", sum.ms_per_epoch_mean},
                 {"per_run", json::array()}};
  for (const auto& r : sum.results) timing["per_run"].push_back(r.ms_per_epoch);
  write_text_file(out / "timing.json", timing.dump(2) + "\n");

  save_checkpoint((out / "best.ckpt").string(), sum.best_params);
  return sum.any_diverged ? 4 : 0;
}

int cmd_depth_sweep(const ExperimentConfig& cfg) {
  const HeteroGraph g = load_experiment_graph(cfg);
  ResultsTable table;
  for (const int depth : cfg.depths) {
    ModelSpec m = cfg.model;
    m.depth = depth;
    table.rows.push_back(summarize_row(m, multi_run(m, g, cfg.train, cfg.runs)));
  }

  const std::filesystem::path out(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + out.string() + "'");
  json doc = {{"model", model_json(cfg.model)},
              {"depths", cfg.depths},
              {"rows", json::array()}};
  for (const auto& r : table.rows) doc["rows"].push_back(row_json(r));
  write_text_file(out / "sweep.json", doc.dump(2) + "\n");
  write_text_file(out / "sweep.csv", results_table_csv(table));

  for (const auto& r : table.rows) {
    if (r.any_diverged) return 4;
  }
  return 0;
}

int cmd_ablation(const ExperimentConfig& cfg) {
  if (cfg.model.kind != ModelKind::het_gtcn &&
      cfg.model.kind != ModelKind::het_gtan) {
    throw ConfigError(
        "ablation needs a tree-family base model (het_gtcn or het_gtan)");
  }
  const HeteroGraph g = load_experiment_graph(cfg);

  std::vector<ModelSpec> grid;
  for (const AggregatorKind agg : {AggregatorKind::semantic,
                                   AggregatorKind::mean,
                                   AggregatorKind::weighted_sum}) {
    ModelSpec m = cfg.model;
    m.depth = 5;
    m.aggregator = agg;
    grid.push_back(m);
  }
  if (cfg.model.kind == ModelKind::het_gtan) {
    ModelSpec m = cfg.model;
    m.depth = 5;
    m.kind = ModelKind::het_gtan_ns;
    m.aggregator = AggregatorKind::none;
    m.semantic_query_zero = false;
    grid.push_back(m);
  }

  ResultsTable table;
  for (const auto& m : grid) {
    table.rows.push_back(summarize_row(m, multi_run(m, g, cfg.train, cfg.runs)));
  }

  const std::filesystem::path out(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + out.string() + "'");
  json doc = {{"model", model_json(cfg.model)}, {"rows", json::array()}};
  for (const auto& r : table.rows) doc["rows"].push_back(row_json(r));
  write_text_file(out / "ablation.json", doc.dump(2) + "\n");
  write_text_file(out / "ablation.csv", results_table_csv(table));

  for (const auto& r : table.rows) {
    if (r.any_diverged) return 4;
  }
  return 0;
}

int cmd_gen_synthetic(const ExperimentConfig& cfg) {
  if (!cfg.synthetic) {
    throw ConfigError("gen-synthetic needs a 'synthetic' block in the config");
  }
  const HeteroGraph g = generate_synthetic(*cfg.synthetic);
  write_dataset(g, cfg.out_dir);
  return 0;
}

namespace {

struct GradTarget {
  std::string name;
  std::function<GradCheckReport()> run;
};

using P = std::pair<std::string, Tensor<double>>;

Tensor<double> rnd(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0,
                   double hi = 1.0) {
  Tensor<double> t(r, c, true);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from 0 so kinked activations differentiate cleanly.
Tensor<double> rnd_offz(std::size_t r, std::size_t c, Rng& rng) {
  Tensor<double> t(r, c, true);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double m = rng.uniform(0.3, 1.2);
    t.data()[i] = rng.bernoulli(0.5) ? m : -m;
  }
  return t;
}

std::vector<GradTarget> op_targets() {
  std::vector<GradTarget> ts;
  auto push = [&ts](std::string name, std::function<GradCheckReport()> fn) {
    ts.push_back({std::move(name), std::move(fn)});
  };

  push("op/matmul", [] {
    Rng r = Rng::keyed(11, "matmul");
    Tensor<double> a = rnd(3, 4, r), b = rnd(4, 2, r);
    return grad_check(
        [&](Tape<double>& tp) { return sum_all(tp, matmul(tp, a, b)); },
        {P{"A", a}, P{"B", b}});
  });
  push("op/add", [] {
    Rng r = Rng::keyed(12, "add");
    Tensor<double> a = rnd(3, 3, r), b = rnd(3, 3, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return sum_all(tp, activation(tp, add(tp, a, b), Act::tanh));
        },
        {P{"A", a}, P{"B", b}});
  });
  push("op/add_row", [] {
    Rng r = Rng::keyed(13, "add_row");
    Tensor<double> x = rnd(3, 4, r), b = rnd(1, 4, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return sum_all(tp, activation(tp, add_row(tp, x, b), Act::tanh));
        },
        {P{"X", x}, P{"b", b}});
  });
  push("op/scale_const", [] {
    Rng r = Rng::keyed(14, "scale_const");
    Tensor<double> x = rnd(3, 3, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return sum_all(tp, activation(tp, scale_const(tp, x, 1.7), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/scale_scalar", [] {
    Rng r = Rng::keyed(15, "scale_scalar");
    Tensor<double> x = rnd(3, 3, r), s = rnd(1, 1, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return sum_all(tp, activation(tp, scale_scalar(tp, x, s), Act::tanh));
        },
        {P{"X", x}, P{"s", s}});
  });
  push("op/diag_scale", [] {
    Rng r = Rng::keyed(16, "diag_scale");
    Tensor<double> x = rnd(4, 3, r);
    auto w = std::make_shared<std::vector<double>>(
        std::vector<double>{0.5, 0.0, 2.0, 1.0});
    return grad_check(
        [&, w](Tape<double>& tp) {
          return sum_all(tp, activation(tp, diag_scale(tp, x, *w), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/activation", [] {
    Rng r = Rng::keyed(17, "activation");
    Tensor<double> x = rnd_offz(4, 4, r);
    return grad_check(
        [&](Tape<double>& tp) {
          Tensor<double> acc = sum_all(tp, activation(tp, x, Act::identity));
          for (const Act k : {Act::relu, Act::leaky_relu, Act::elu, Act::tanh,
                              Act::sigmoid}) {
            acc = add(tp, acc, sum_all(tp, activation(tp, x, k)));
          }
          return acc;
        },
        {P{"X", x}});
  });
  push("op/dropout", [] {
    Rng r = Rng::keyed(18, "dropout");
    Tensor<double> x = rnd(4, 4, r);
    return grad_check(
        [&](Tape<double>& tp) {
          Rng mask_rng = Rng::keyed(99, "mask");  // same mask every call
          return sum_all(
              tp, activation(tp, dropout(tp, x, 0.3, mask_rng, true), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/slice_concat", [] {
    Rng r = Rng::keyed(19, "slice");
    Tensor<double> x = rnd(3, 3, r);
    return grad_check(
        [&](Tape<double>& tp) {
          std::vector<Tensor<double>> parts{slice_rows(tp, x, 0, 2),
                                            slice_rows(tp, x, 1, 3)};
          return sum_all(
              tp, activation(tp, concat_rows(tp, parts), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/mean_all", [] {
    Rng r = Rng::keyed(20, "mean_all");
    Tensor<double> x = rnd(4, 3, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return mean_all(tp, activation(tp, x, Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/spmm", [] {
    Rng r = Rng::keyed(21, "spmm");
    Tensor<double> x = rnd(3, 2, r);
    auto m = std::make_shared<SparseAdjacency>(SparseAdjacency::from_entries(
        4, 3,
        {{0, 0, 0.5}, {0, 2, 0.25}, {2, 1, 1.5}, {3, 0, -0.75}}));
    return grad_check(
        [&, m](Tape<double>& tp) {
          return sum_all(tp, activation(tp, spmm(tp, *m, x), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/gather_rows", [] {
    Rng r = Rng::keyed(22, "gather");
    Tensor<double> x = rnd(3, 3, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return sum_all(
              tp, activation(tp, gather_rows(tp, x, {2, 0, 1, 1}), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/segment_attention", [] {
    // gather_entries -> segment_softmax -> segment_weighted_sum, the
    // attention-layer spine, on a hand-built two-segment index.
    Rng r = Rng::keyed(23, "segment");
    Tensor<double> h = rnd(3, 2, r), z = rnd(3, 2, r), a = rnd(2, 1, r);
    auto seg = std::make_shared<SegmentIndex>();
    seg->n_nodes = 3;
    seg->seg_ptr = {0, 3, 5};
    seg->seg_target = {0, 1};
    seg->source = {2, 1, 0, 2, 1};
    seg->target = {0, 0, 0, 1, 1};
    seg->is_self = {0, 0, 1, 0, 1};
    seg->validate();
    return grad_check(
        [&, seg](Tape<double>& tp) {
          Tensor<double> vals = gather_entries(tp, h, z, *seg);
          Tensor<double> scores =
              activation(tp, matmul(tp, vals, a), Act::leaky_relu, 0.2);
          Tensor<double> alpha = segment_softmax(tp, scores, *seg);
          Tensor<double> out = segment_weighted_sum(tp, alpha, vals, *seg);
          return sum_all(tp, activation(tp, out, Act::tanh));
        },
        {P{"h", h}, P{"z", z}, P{"a", a}});
  });
  push("op/softmax_col", [] {
    Rng r = Rng::keyed(24, "softmax_col");
    Tensor<double> x = rnd(5, 1, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return sum_all(tp, activation(tp, softmax_col(tp, x), Act::tanh));
        },
        {P{"X", x}});
  });
  push("op/cross_entropy", [] {
    Rng r = Rng::keyed(25, "ce");
    Tensor<double> logits = rnd(4, 3, r);
    return grad_check(
        [&](Tape<double>& tp) {
          return cross_entropy_loss(tp, logits, {0, 2, 1, 1}, {0, 1, 3});
        },
        {P{"logits", logits}});
  });
  return ts;
}

std::vector<GradTarget> model_targets() {
  std::vector<GradTarget> ts;
  for (const ModelKind kind :
       {ModelKind::het_gtcn, ModelKind::het_gtan, ModelKind::het_gtan_ns,
        ModelKind::het_gcn, ModelKind::het_gat}) {
    ts.push_back({std::string("model/") + model_kind_name(kind), [kind] {
                    ModelSpec spec;
                    spec.kind = kind;
                    spec.depth = 2;
                    spec.hidden = 8;
                    spec.semantic_hidden = 6;
                    spec.aggregator = kind == ModelKind::het_gtan_ns
                                          ? AggregatorKind::none
                                          : AggregatorKind::semantic;
                    const HeteroGraph g = fixture_graph();
                    const auto prep = PreparedGraph<double>::prepare(g);
                    ModelParams<double> params =
                        init_params<double>(spec, g.schema, 3);
                    return grad_check(
                        [&](Tape<double>& tp) {
                          Tensor<double> logits = model_forward(
                              tp, spec, params, prep, false, nullptr);
                          return cross_entropy_loss(tp, logits, prep.labels,
                                                    prep.train_idx);
                        },
                        params.trainable, 1e-5, 12);
                  }});
  }
  return ts;
}

}  // namespace

int cmd_gradcheck(bool inject_backward_fault) {
  std::vector<GradTarget> targets = op_targets();
  for (auto& t : model_targets()) targets.push_back(std::move(t));
  if (inject_backward_fault) {
    // Deliberately wrong pull (3x instead of 2x): must be caught.
    targets.push_back({"op/faulty_backward", [] {
                         Tensor<double> x =
                             Tensor<double>::from(2, 2, {0.3, -0.4, 0.7, 1.1}, true);
                         return grad_check(
                             [&](Tape<double>& tp) {
                               Tensor<double> y(2, 2);
                               for (std::size_t i = 0; i < 4; ++i) {
                                 y.data()[i] = 2.0 * x.data()[i];
                               }
                               tp.record("faulty", {&x}, y, [x, y]() {
                                 for (std::size_t i = 0; i < 4; ++i) {
                                   x.grad()[i] += 3.0 * y.grad()[i];
                                 }
                               });
                               return sum_all(tp, y);
                             },
                             {P{"X", x}});
                       }});
  }

  constexpr double kThreshold = 1e-4;
  double worst = 0.0;
  bool ok = true;
  for (const auto& t : targets) {
    const GradCheckReport rep = t.run();
    const bool pass = rep.max_rel_err < kThreshold;
    ok = ok && pass;
    worst = std::max(worst, rep.max_rel_err);
    const std::string tail =
        (rep.worst.empty() ? std::string() : " worst=" + rep.worst) +
        (pass ? "" : " FAIL");
    std::printf("%s: max_rel_err=%.3e coords=%zu%s\n", t.name.c_str(),
                rep.max_rel_err, rep.coords_checked, tail.c_str());
  }
  std::printf("gradcheck: %zu targets, max_rel_err=%.3e, %s\n", targets.size(),
              worst, ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

}  // namespace hetgt
