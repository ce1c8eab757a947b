// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hetgt/graph.hpp"
#include "hetgt/sparse.hpp"

namespace hetgt {

/// Row-stochastic normalized adjacency of one edge type over the global
/// index: entry (dst, src) = 1/(deg+1) per edge, plus a self loop of the
/// same weight at every dst-type node, where deg counts the node's incoming
/// edges of this type. Rows of nodes outside the dst type are empty.
/// Per-row entry order: edges in list order, self loop last.
SparseAdjacency normalize_adjacency(const HeteroGraph& g, std::size_t edge_type);

/// One segment per dst-type node: its incoming sources in edge-list order,
/// then the self entry. Segments are laid out by ascending target global id.
SegmentIndex build_segments(const HeteroGraph& g, std::size_t edge_type);

/// Global ids whose raw features can influence `node` within k propagation
/// hops: BFS from `node` walking every edge type backwards (dst -> src),
/// plus the node itself.
std::vector<std::size_t> k_hop_neighborhood(const HeteroGraph& g,
                                            std::size_t node, std::size_t k);

/// Everything the per-layer kernels need for one edge type, derived once
/// from the graph: the full normalized adjacency, the same matrix with the
/// self-loop diagonal stripped, the per-node self-loop weights, and the
/// attention segments. Immutable after construction; tapes reference it, so
/// it must outlive any tape recorded against it.
struct EdgeTypeContext {
  std::string name;
  std::size_t src_type = 0;
  std::size_t dst_type = 0;
  SparseAdjacency adj;          // self loops included
  SparseAdjacency adj_off;      // edges only
  std::vector<double> self_weight;  // global count; 0 off the dst type
  SegmentIndex seg;
};

EdgeTypeContext build_edge_context(const HeteroGraph& g, std::size_t edge_type);

}  // namespace hetgt
