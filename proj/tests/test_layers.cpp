// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hetgt/fixture.hpp"
#include "hetgt/graph_ops.hpp"
#include "hetgt/layers.hpp"
#include "hetgt/models.hpp"
#include "hetgt/synthetic.hpp"

using namespace hetgt;

namespace {

// Arbitrary but deterministic global-index state tensors for the fixture
// graph (3 nodes), width 2.
template <class S>
Tensor<S> fix_h() {
  return Tensor<S>::from(3, 2, {1, 2, 3, 4, 5, 6}, true);
}
template <class S>
Tensor<S> fix_z() {
  return Tensor<S>::from(3, 2, {10, 20, 30, 40, 50, 60}, true);
}

template <class S>
Tensor<S> random_tensor(std::size_t r, std::size_t c, Rng& rng,
                        bool grad = false) {
  Tensor<S> t(r, c, grad);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data()[i] = static_cast<S>(rng.normal());
  }
  return t;
}

}  // namespace

TEST_CASE("projection computes sigma(xW + b) per type in global order") {
  Tape<double> tp;
  std::vector<Tensor<double>> x = {
      Tensor<double>::from(2, 2, {1, 0, 0, 1}),  // papers
      Tensor<double>::from(1, 3, {1, 1, 1}),     // author
  };
  std::vector<Tensor<double>> w = {
      Tensor<double>::from(2, 2, {1, 2, 3, 4}),
      Tensor<double>::from(3, 2, {1, 0, 0, 1, 1, 1}),
  };
  std::vector<Tensor<double>> b = {
      Tensor<double>::from(1, 2, {0.5, -0.5}),
      Tensor<double>::from(1, 2, {0, 0}),
  };
  auto z = project_features(tp, x, w, b, Act::identity);
  CHECK(z.values() == std::vector<double>{1.5, 1.5, 3.5, 3.5, 2, 2});

  auto zr = project_features(tp, x, w, b, Act::relu);
  auto ze = project_features(tp, x, w, b, Act::elu);
  CHECK(zr.values() == z.values());  // all positive here
  CHECK(ze.values() == z.values());

  b[0] = Tensor<double>::from(1, 2, {-10, 0});
  auto zneg = project_features(tp, x, w, b, Act::relu);
  CHECK(zneg.at(0, 0) == 0.0);
}

TEST_CASE("tree convolution averages sources and anchors self on z") {
  HeteroGraph g = fixture_graph();
  auto ctx = build_edge_context(g, g.schema.find_edge_type("AP"));
  Tape<double> tp;
  auto out = gtcn_edge_forward(tp, fix_h<double>(), fix_z<double>(), ctx);
  // p0: (h[a0] + z[p0]) / 2, p1: (h[a0] + z[p1]) / 2, a0 untouched.
  CHECK(out.values() == std::vector<double>{(5 + 10) / 2.0, (6 + 20) / 2.0,
                                            (5 + 30) / 2.0, (6 + 40) / 2.0,
                                            0.0, 0.0});
}

TEST_CASE("zero attention collapses tree attention onto tree convolution") {
  SUBCASE("fixture graph") {
    HeteroGraph g = fixture_graph();
    auto ctx = build_edge_context(g, g.schema.find_edge_type("AP"));
    Tape<double> tp;
    auto h = fix_h<double>(), z = fix_z<double>();
    auto att = Tensor<double>::from(4, 1, {0, 0, 0, 0}, true);
    auto pre = gtan_edge_preact(tp, h, z, att, ctx);
    auto conv = gtcn_edge_forward(tp, h, z, ctx);
    CHECK(pre.values() == conv.values());
    auto full = gtan_edge_forward(tp, h, z, att, ctx);
    auto conv_elu = activation(tp, conv, Act::elu);
    CHECK(full.values() == conv_elu.values());
  }
  SUBCASE("random synthetic graph, every edge type") {
    HeteroGraph g = generate_synthetic(default_synthetic_spec());
    Rng rng = Rng::keyed(5, "collapse");
    const std::size_t n = g.schema.total_nodes();
    auto h = random_tensor<double>(n, 4, rng);
    auto z = random_tensor<double>(n, 4, rng);
    auto att = Tensor<double>(8, 1);  // zeros
    for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
      auto ctx = build_edge_context(g, k);
      Tape<double> tp;
      tp.set_recording(false);
      auto pre = gtan_edge_preact(tp, h, z, att, ctx);
      auto conv = gtcn_edge_forward(tp, h, z, ctx);
      CHECK(pre.values() == conv.values());
    }
  }
  SUBCASE("query-only attention still yields uniform weights") {
    // With the key half zero, every entry of a segment shares its target's
    // score, so the softmax is uniform and matches the convolution weights.
    HeteroGraph g = fixture_graph();
    auto ctx = build_edge_context(g, g.schema.find_edge_type("PA"));
    Tape<double> tp;
    auto h = fix_h<double>(), z = fix_z<double>();
    auto att = Tensor<double>::from(4, 1, {0.7, -1.3, 0, 0});
    auto pre = gtan_edge_preact(tp, h, z, att, ctx);
    auto conv = gtcn_edge_forward(tp, h, z, ctx);
    CHECK(pre.values() == conv.values());
  }
}

TEST_CASE("semantic attention weighs a saturated pair as 0.8 / 0.2") {
  Tape<double> tp;
  std::vector<Tensor<double>> blocks = {Tensor<double>::from(1, 1, {1.0}),
                                        Tensor<double>::from(1, 1, {-1.0})};
  auto q = Tensor<double>::from(1, 1, {std::log(2.0)});
  auto w = Tensor<double>::from(1, 1, {20.0});  // tanh saturates to +-1
  auto b = Tensor<double>::from(1, 1, {0.0});
  auto out = semantic_aggregate(tp, blocks, q, w, b);
  // scores ~ [ln2, -ln2] -> beta = [0.8, 0.2] -> out = 0.8 - 0.2.
  CHECK(out.at(0, 0) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("semantic attention rejects degenerate inputs") {
  Tape<double> tp;
  auto q = Tensor<double>::from(1, 1, {0.0});
  auto w = Tensor<double>::from(1, 1, {1.0});
  auto b = Tensor<double>::from(1, 1, {0.0});
  CHECK_THROWS_AS(semantic_aggregate(tp, std::vector<Tensor<double>>{}, q, w, b),
                  ContractError);
  std::vector<Tensor<double>> empty_block = {Tensor<double>(0, 1)};
  CHECK_THROWS_AS(semantic_aggregate(tp, empty_block, q, w, b), StructureError);
}

TEST_CASE("zero query makes semantic attention the exact mean") {
  auto run = [](auto scalar) {
    using S = decltype(scalar);
    Rng rng = Rng::keyed(9, "semmean");
    std::vector<Tensor<S>> blocks;
    for (int k = 0; k < 3; ++k) blocks.push_back(random_tensor<S>(5, 4, rng));
    Tape<S> tp;
    auto q = Tensor<S>(3, 1);  // zero
    auto w = random_tensor<S>(4, 3, rng);
    auto b = random_tensor<S>(1, 3, rng);
    auto sem = semantic_aggregate(tp, blocks, q, w, b);
    auto mean = mean_aggregate(tp, blocks);
    CHECK(sem.values() == mean.values());
  };
  run(1.0f);
  run(1.0);
}

TEST_CASE("weighted sum honors explicit coefficients") {
  Tape<double> tp;
  std::vector<Tensor<double>> blocks = {
      Tensor<double>::from(2, 1, {1, 10}),
      Tensor<double>::from(2, 1, {2, 20}),
  };
  SUBCASE("one-hot picks a block") {
    std::vector<Tensor<double>> theta = {Tensor<double>::from(1, 1, {1.0}),
                                         Tensor<double>::from(1, 1, {0.0})};
    auto out = weighted_sum_aggregate(tp, blocks, theta);
    CHECK(out.values() == std::vector<double>{1, 10});
  }
  SUBCASE("arbitrary weights") {
    std::vector<Tensor<double>> theta = {Tensor<double>::from(1, 1, {2.0}),
                                         Tensor<double>::from(1, 1, {-1.0})};
    auto out = weighted_sum_aggregate(tp, blocks, theta);
    CHECK(out.values() == std::vector<double>{0, 0});
  }
  SUBCASE("uniform 1/K weights match the mean") {
    std::vector<Tensor<double>> theta = {
        Tensor<double>::from(1, 1, {1.0 / 2}),
        Tensor<double>::from(1, 1, {1.0 / 2})};
    auto out = weighted_sum_aggregate(tp, blocks, theta);
    CHECK(out.values() == mean_aggregate(tp, blocks).values());
  }
  SUBCASE("count mismatch is rejected") {
    std::vector<Tensor<double>> theta = {Tensor<double>::from(1, 1, {1.0})};
    CHECK_THROWS_AS(weighted_sum_aggregate(tp, blocks, theta), DimensionError);
  }
}

TEST_CASE("output head is a plain affine map") {
  Tape<double> tp;
  auto h = Tensor<double>::from(2, 2, {1, 0, 0, 1});
  auto w = Tensor<double>::from(2, 3, {1, 2, 3, 4, 5, 6});
  auto b = Tensor<double>::from(1, 3, {0.1, 0.2, 0.3});
  auto out = output_head(tp, h, w, b);
  CHECK(out.values() ==
        std::vector<double>{1.1, 2.2, 3.3, 4.1, 5.2, 6.3});
}

TEST_CASE("attention weights of every segment sum to one on a real graph") {
  HeteroGraph g = generate_synthetic(default_synthetic_spec());
  Rng rng = Rng::keyed(31, "attsum");
  const std::size_t n = g.schema.total_nodes();
  for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
    auto ctx = build_edge_context(g, k);
    for (int trial = 0; trial < 12; ++trial) {
      auto z = random_tensor<double>(n, 3, rng);
      auto h = random_tensor<double>(n, 3, rng);
      auto att = random_tensor<double>(6, 1, rng);
      Tape<double> tp;
      tp.set_recording(false);
      auto aq = slice_rows(tp, att, 0, 3);
      auto av = slice_rows(tp, att, 3, 6);
      auto vals = gather_entries(tp, h, z, ctx.seg);
      auto zq = matmul(tp, z, aq);
      auto scores = activation(
          tp, add(tp, gather_rows(tp, zq, ctx.seg.target), matmul(tp, vals, av)),
          Act::leaky_relu, kAttentionSlope);
      auto alpha = segment_softmax(tp, scores, ctx.seg);
      for (std::size_t s = 0; s < ctx.seg.segments(); ++s) {
        double sum = 0.0;
        for (std::size_t p = ctx.seg.seg_ptr[s]; p < ctx.seg.seg_ptr[s + 1]; ++p) {
          sum += alpha.at(p, 0);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }
}

namespace {

/// Relabels every node type by a keyed random permutation, re-expressing
/// edges (in the same list order), features, labels and splits.
struct Permuted {
  HeteroGraph g;
  std::vector<std::vector<std::uint32_t>> pi;  // per type: old -> new
};

Permuted permute_graph(const HeteroGraph& g, std::uint64_t seed) {
  Permuted out;
  out.g.schema = g.schema;
  const auto& s = g.schema;
  out.pi.resize(s.node_types.size());
  for (std::size_t t = 0; t < s.node_types.size(); ++t) {
    auto& p = out.pi[t];
    p.resize(s.node_types[t].count);
    std::iota(p.begin(), p.end(), 0);
    Rng rng = Rng::keyed(seed, "perm/" + s.node_types[t].name);
    rng.shuffle(p);
  }
  out.g.features.resize(g.features.size());
  for (std::size_t t = 0; t < g.features.size(); ++t) {
    const std::size_t d = s.node_types[t].feature_dim;
    out.g.features[t].resize(g.features[t].size());
    for (std::size_t u = 0; u < s.node_types[t].count; ++u) {
      std::copy_n(g.features[t].begin() + u * d, d,
                  out.g.features[t].begin() + out.pi[t][u] * d);
    }
  }
  out.g.edges.resize(g.edges.size());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto st = s.edge_types[k].src_type, dt = s.edge_types[k].dst_type;
    for (const auto& [a, b] : g.edges[k]) {
      out.g.edges[k].emplace_back(out.pi[st][a], out.pi[dt][b]);
    }
  }
  const auto& pt = out.pi[s.target_type];
  out.g.labels.resize(g.labels.size());
  for (std::size_t u = 0; u < g.labels.size(); ++u) {
    out.g.labels[pt[u]] = g.labels[u];
  }
  auto map = [&](const std::vector<std::uint32_t>& xs) {
    std::vector<std::uint32_t> ys;
    for (auto u : xs) ys.push_back(pt[u]);
    return ys;
  };
  out.g.splits = {map(g.splits.train), map(g.splits.val), map(g.splits.test)};
  out.g.validate();
  return out;
}

}  // namespace

TEST_CASE("full models are exactly equivariant under node relabeling") {
  SyntheticSpec spec = default_synthetic_spec();
  spec.seed = 13;
  HeteroGraph g = generate_synthetic(spec);
  Permuted perm = permute_graph(g, 99);

  for (const auto kind : {ModelKind::het_gtan, ModelKind::het_gtcn}) {
    ModelSpec ms;
    ms.kind = kind;
    ms.depth = 2;
    ms.hidden = 8;
    ms.semantic_hidden = 5;
    auto params = init_params<double>(ms, g.schema, 21);

    auto prep_a = PreparedGraph<double>::prepare(g);
    auto prep_b = PreparedGraph<double>::prepare(perm.g);
    Tape<double> ta, tb;
    ta.set_recording(false);
    tb.set_recording(false);
    auto la = model_forward(ta, ms, params, prep_a, false, nullptr);
    auto lb = model_forward(tb, ms, params, prep_b, false, nullptr);

    const auto& pt = perm.pi[g.schema.target_type];
    REQUIRE(la.rows() == lb.rows());
    for (std::size_t u = 0; u < la.rows(); ++u) {
      for (std::size_t j = 0; j < la.cols(); ++j) {
        CHECK(la.at(u, j) == lb.at(pt[u], j));
      }
    }
  }
}
