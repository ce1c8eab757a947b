// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hetgt/graph_ops.hpp"
#include "hetgt/ops.hpp"

namespace hetgt {

constexpr double kAttentionSlope = 0.2;  // LeakyReLU slope in attention scores

/// Per-type projection z = sigma(x W + b), assembled in global index order.
/// x_per_type[a] is count_a x d_a; w[a] is d_a x f; b[a] is 1 x f.
template <class S>
Tensor<S> project_features(Tape<S>& tp, const std::vector<Tensor<S>>& x_per_type,
                           const std::vector<Tensor<S>>& w,
                           const std::vector<Tensor<S>>& b, Act nonlinearity) {
  if (x_per_type.empty() || x_per_type.size() != w.size() ||
      x_per_type.size() != b.size()) {
    throw DimensionError("project_features: per-type lists disagree");
  }
  const std::size_t f = w.front().cols();
  std::vector<Tensor<S>> blocks;
  blocks.reserve(x_per_type.size());
  for (std::size_t a = 0; a < x_per_type.size(); ++a) {
    if (w[a].cols() != f) {
      throw DimensionError("project_features: all types must project to one width");
    }
    blocks.push_back(add_row(tp, matmul(tp, x_per_type[a], w[a]), b[a]));
  }
  Tensor<S> z = concat_rows(tp, blocks);
  return activation(tp, z, nonlinearity);
}

/// Tree-convolution edge layer: out[u] = sum_v A_uv h[v] + A_uu z[u] at
/// dst-type rows, zero elsewhere. The self term anchors on z, the initial
/// projected features.
template <class S>
Tensor<S> gtcn_edge_forward(Tape<S>& tp, const Tensor<S>& h, const Tensor<S>& z,
                            const EdgeTypeContext& ctx) {
  if (h.rows() != z.rows() || h.cols() != z.cols()) {
    throw DimensionError("gtcn_edge_forward: h and z shapes differ");
  }
  return add(tp, spmm(tp, ctx.adj_off, h),
             diag_scale(tp, z, ctx.self_weight));
}

/// Tree-attention edge layer before its ELU: scores are
/// LeakyReLU([z_u || h_v] . a) with the self entry keyed on z_u itself,
/// softmax-normalized per target segment. The value fold visits edge
/// entries in list order with the self entry last, mirroring
/// gtcn_edge_forward's fold, so zero attention reproduces it bit-for-bit.
template <class S>
Tensor<S> gtan_edge_preact(Tape<S>& tp, const Tensor<S>& h, const Tensor<S>& z,
                           const Tensor<S>& att, const EdgeTypeContext& ctx,
                           double attn_dropout = 0.0, Rng* rng = nullptr,
                           bool train = false) {
  const std::size_t f = z.cols();
  if (h.rows() != z.rows() || h.cols() != f) {
    throw DimensionError("gtan_edge_preact: h and z shapes differ");
  }
  if (att.rows() != 2 * f || att.cols() != 1) {
    throw DimensionError("gtan_edge_preact: attention vector must be " +
                         std::to_string(2 * f) + "x1");
  }
  Tensor<S> aq = slice_rows(tp, att, 0, f);       // query half (z_u side)
  Tensor<S> av = slice_rows(tp, att, f, 2 * f);   // key half (h_v side)
  Tensor<S> vals = gather_entries(tp, h, z, ctx.seg);
  Tensor<S> zq = matmul(tp, z, aq);
  Tensor<S> scores =
      add(tp, gather_rows(tp, zq, ctx.seg.target), matmul(tp, vals, av));
  scores = activation(tp, scores, Act::leaky_relu, kAttentionSlope);
  Tensor<S> alpha = segment_softmax(tp, scores, ctx.seg);
  if (train && attn_dropout > 0.0) {
    if (!rng) throw ContractError("attention dropout requires an RNG");
    alpha = dropout(tp, alpha, attn_dropout, *rng, true);
  }
  return segment_weighted_sum(tp, alpha, vals, ctx.seg);
}

template <class S>
Tensor<S> gtan_edge_forward(Tape<S>& tp, const Tensor<S>& h, const Tensor<S>& z,
                            const Tensor<S>& att, const EdgeTypeContext& ctx,
                            double attn_dropout = 0.0, Rng* rng = nullptr,
                            bool train = false) {
  return activation(
      tp, gtan_edge_preact(tp, h, z, att, ctx, attn_dropout, rng, train),
      Act::elu);
}

/// Plain convolution edge layer: out = A (h W), self term from h (no
/// initial-feature anchor), shared W, no bias, no activation here.
template <class S>
Tensor<S> gcn_edge_forward(Tape<S>& tp, const Tensor<S>& h, const Tensor<S>& w,
                           const EdgeTypeContext& ctx) {
  return spmm(tp, ctx.adj, matmul(tp, h, w));
}

/// Attention edge layer with both attention sides on the current hidden
/// state: scores LeakyReLU([h_u W || h_v W] . a), out = ELU(sum alpha h_v W).
template <class S>
Tensor<S> gat_edge_forward(Tape<S>& tp, const Tensor<S>& h, const Tensor<S>& w,
                           const Tensor<S>& att, const EdgeTypeContext& ctx,
                           double attn_dropout = 0.0, Rng* rng = nullptr,
                           bool train = false) {
  const std::size_t f = w.cols();
  if (att.rows() != 2 * f || att.cols() != 1) {
    throw DimensionError("gat_edge_forward: attention vector must be " +
                         std::to_string(2 * f) + "x1");
  }
  Tensor<S> hw = matmul(tp, h, w);
  Tensor<S> aq = slice_rows(tp, att, 0, f);
  Tensor<S> av = slice_rows(tp, att, f, 2 * f);
  Tensor<S> hq = matmul(tp, hw, aq);
  Tensor<S> hv = matmul(tp, hw, av);
  Tensor<S> scores = add(tp, gather_rows(tp, hq, ctx.seg.target),
                         gather_rows(tp, hv, ctx.seg.source));
  scores = activation(tp, scores, Act::leaky_relu, kAttentionSlope);
  Tensor<S> alpha = segment_softmax(tp, scores, ctx.seg);
  if (train && attn_dropout > 0.0) {
    if (!rng) throw ContractError("attention dropout requires an RNG");
    alpha = dropout(tp, alpha, attn_dropout, *rng, true);
  }
  Tensor<S> vals = gather_rows(tp, hw, ctx.seg.source);
  return activation(tp, segment_weighted_sum(tp, alpha, vals, ctx.seg),
                    Act::elu);
}

/// Semantic attention over edge-type blocks of one node type:
/// w_k = mean_u q . tanh(W blocks_k[u] + b), beta = softmax(w),
/// out = sum_k beta_k blocks_k. q is (f' x 1); w is stored (f x f') for
/// right-multiplication; b is (1 x f'). The per-node mean accumulates in
/// value order, so beta — and thus the whole layer — is exactly invariant
/// under node relabeling. With q = 0 every beta_k is the same 1/K scalar
/// mean_aggregate multiplies by, and the two paths share one op chain, so
/// they agree bit-for-bit.
template <class S>
Tensor<S> semantic_aggregate(Tape<S>& tp, const std::vector<Tensor<S>>& blocks,
                             const Tensor<S>& q, const Tensor<S>& w,
                             const Tensor<S>& b) {
  if (blocks.empty()) {
    throw ContractError("semantic_aggregate: no edge-type blocks");
  }
  if (blocks.front().rows() == 0) {
    throw StructureError("semantic_aggregate: node type has no nodes");
  }
  std::vector<Tensor<S>> per_type_score;
  per_type_score.reserve(blocks.size());
  for (const auto& blk : blocks) {
    Tensor<S> t = activation(tp, add_row(tp, matmul(tp, blk, w), b), Act::tanh);
    per_type_score.push_back(mean_all(tp, matmul(tp, t, q)));
  }
  Tensor<S> beta = softmax_col(tp, concat_rows(tp, per_type_score));
  Tensor<S> out = scale_scalar(tp, blocks[0], slice_rows(tp, beta, 0, 1));
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    out = add(tp, out,
              scale_scalar(tp, blocks[k], slice_rows(tp, beta, k, k + 1)));
  }
  return out;
}

template <class S>
Tensor<S> mean_aggregate(Tape<S>& tp, const std::vector<Tensor<S>>& blocks) {
  if (blocks.empty()) throw ContractError("mean_aggregate: no edge-type blocks");
  const S inv = S(1) / static_cast<S>(blocks.size());
  Tensor<S> out = scale_const(tp, blocks[0], inv);
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    out = add(tp, out, scale_const(tp, blocks[k], inv));
  }
  return out;
}

/// Free per-edge-type weights (no softmax): out = sum_k theta_k blocks_k.
/// theta entries are 1x1 tensors (slices of the layer's parameter).
template <class S>
Tensor<S> weighted_sum_aggregate(Tape<S>& tp,
                                 const std::vector<Tensor<S>>& blocks,
                                 const std::vector<Tensor<S>>& theta) {
  if (blocks.empty()) {
    throw ContractError("weighted_sum_aggregate: no edge-type blocks");
  }
  if (theta.size() != blocks.size()) {
    throw DimensionError("weighted_sum_aggregate: " +
                         std::to_string(theta.size()) + " weights for " +
                         std::to_string(blocks.size()) + " blocks");
  }
  Tensor<S> out = scale_scalar(tp, blocks[0], theta[0]);
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    out = add(tp, out, scale_scalar(tp, blocks[k], theta[k]));
  }
  return out;
}

/// logits = h W + b; no squashing, the loss side applies softmax.
template <class S>
Tensor<S> output_head(Tape<S>& tp, const Tensor<S>& h_target, const Tensor<S>& w,
                      const Tensor<S>& b) {
  return add_row(tp, matmul(tp, h_target, w), b);
}

}  // namespace hetgt
