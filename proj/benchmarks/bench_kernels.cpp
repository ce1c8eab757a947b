// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "hetgt/graph_ops.hpp"
#include "hetgt/synthetic.hpp"
#include "hetgt/training.hpp"

namespace {

using namespace hetgt;

SparseAdjacency random_adjacency(std::size_t n, std::size_t per_row,
                                 std::uint64_t seed) {
  Rng rng = Rng::keyed(seed, "bench/adj");
  std::vector<SparseEntry> entries;
  entries.reserve(n * per_row);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < per_row; ++k) {
      // Collisions are rejected by from_entries; probe until free.
      for (;;) {
        const auto j = static_cast<std::uint32_t>(rng.index(n));
        bool dup = false;
        for (std::size_t b = entries.size() - k; b < entries.size(); ++b) {
          if (entries[b].col == j) {
            dup = true;
            break;
          }
        }
        if (!dup) {
          entries.push_back({static_cast<std::uint32_t>(i), j, rng.uniform()});
          break;
        }
      }
    }
  }
  return SparseAdjacency::from_entries(n, n, entries);
}

void BM_spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseAdjacency m = random_adjacency(n, 8, 1);
  Rng rng = Rng::keyed(2, "bench/x");
  Tensor<float> x(n, 64);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x.data()[i] = static_cast<float>(rng.normal());
  }
  for (auto _ : state) {
    Tape<float> tp;
    tp.set_recording(false);
    benchmark::DoNotOptimize(spmm(tp, m, x));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * 8));
}
BENCHMARK(BM_spmm)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

const HeteroGraph& bench_graph() {
  static const HeteroGraph g = [] {
    SyntheticSpec spec = default_synthetic_spec();
    spec.seed = 11;
    return generate_synthetic(spec);
  }();
  return g;
}

void BM_gtan_layer_forward(benchmark::State& state) {
  const auto prep = PreparedGraph<float>::prepare(bench_graph());
  ModelSpec spec;
  spec.kind = ModelKind::het_gtan;
  spec.hidden = 64;
  const ModelParams<float> params = init_params<float>(spec, prep.schema, 3);
  Tape<float> setup;
  setup.set_recording(false);
  const Tensor<float> z = project_features(setup, prep.features, params.proj_w,
                                           params.proj_b, Act::elu);
  for (auto _ : state) {
    Tape<float> tp;
    tp.set_recording(false);
    benchmark::DoNotOptimize(
        gtan_edge_forward(tp, z, z, params.att[0][0], *prep.edges[0]));
  }
}
BENCHMARK(BM_gtan_layer_forward)->Unit(benchmark::kMicrosecond);

void BM_train_epoch(benchmark::State& state) {
  const auto prep = PreparedGraph<float>::prepare(bench_graph());
  ModelSpec spec;
  spec.kind = ModelKind::het_gtan;
  spec.depth = static_cast<int>(state.range(0));
  spec.hidden = 64;
  ModelParams<float> params = init_params<float>(spec, prep.schema, 3);
  AdamState<float> opt = AdamState<float>::init(params.trainable);
  for (auto _ : state) {
    Tape<float> tp;
    Tensor<float> logits = model_forward(tp, spec, params, prep, true, nullptr);
    Tensor<float> loss =
        cross_entropy_loss(tp, logits, prep.labels, prep.train_idx);
    params.zero_grads();
    tp.backward(loss);
    adam_step(params.trainable, opt, 0.005, 0.0);
  }
}
BENCHMARK(BM_train_epoch)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
