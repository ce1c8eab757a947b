// SPDX-License-Identifier: Apache-2.0
#include "hetgt/graph_ops.hpp"

#include <algorithm>
#include <queue>

namespace hetgt {

namespace {

/// Incoming edge count per dst-type node for one edge type.
std::vector<std::size_t> incoming_degrees(const HeteroGraph& g,
                                          std::size_t edge_type) {
  const auto& et = g.schema.edge_types[edge_type];
  std::vector<std::size_t> deg(g.schema.node_types[et.dst_type].count, 0);
  for (const auto& [src, dst] : g.edges[edge_type]) ++deg[dst];
  return deg;
}

}  // namespace

SparseAdjacency normalize_adjacency(const HeteroGraph& g,
                                    std::size_t edge_type) {
  if (edge_type >= g.schema.edge_types.size()) {
    throw RangeError("edge type index out of range");
  }
  const auto& et = g.schema.edge_types[edge_type];
  const std::size_t n = g.schema.total_nodes();
  const std::size_t src_off = g.schema.type_offset(et.src_type);
  const std::size_t dst_off = g.schema.type_offset(et.dst_type);
  const auto deg = incoming_degrees(g, edge_type);

  std::vector<SparseEntry> entries;
  entries.reserve(g.edges[edge_type].size() + deg.size());
  for (const auto& [src, dst] : g.edges[edge_type]) {
    entries.push_back({static_cast<std::uint32_t>(dst_off + dst),
                       static_cast<std::uint32_t>(src_off + src),
                       1.0 / static_cast<double>(deg[dst] + 1)});
  }
  // Self loops appended after all edges, so each row folds edges first and
  // the self term last.
  for (std::size_t u = 0; u < deg.size(); ++u) {
    const auto gid = static_cast<std::uint32_t>(dst_off + u);
    entries.push_back({gid, gid, 1.0 / static_cast<double>(deg[u] + 1)});
  }
  return SparseAdjacency::from_entries(n, n, entries);
}

SegmentIndex build_segments(const HeteroGraph& g, std::size_t edge_type) {
  if (edge_type >= g.schema.edge_types.size()) {
    throw RangeError("edge type index out of range");
  }
  const auto& et = g.schema.edge_types[edge_type];
  const std::size_t src_off = g.schema.type_offset(et.src_type);
  const std::size_t dst_off = g.schema.type_offset(et.dst_type);
  const std::size_t n_dst = g.schema.node_types[et.dst_type].count;

  // Bucket incoming sources per dst node, preserving edge-list order.
  const auto deg = incoming_degrees(g, edge_type);
  SegmentIndex seg;
  seg.n_nodes = g.schema.total_nodes();
  seg.seg_ptr.assign(n_dst + 1, 0);
  for (std::size_t u = 0; u < n_dst; ++u) {
    seg.seg_ptr[u + 1] = seg.seg_ptr[u] + deg[u] + 1;  // +1 self entry
  }
  const std::size_t total = seg.seg_ptr.back();
  seg.seg_target.resize(n_dst);
  seg.source.resize(total);
  seg.target.resize(total);
  seg.is_self.assign(total, 0);

  std::vector<std::size_t> cursor(n_dst);
  for (std::size_t u = 0; u < n_dst; ++u) {
    cursor[u] = seg.seg_ptr[u];
    seg.seg_target[u] = static_cast<std::uint32_t>(dst_off + u);
  }
  for (const auto& [src, dst] : g.edges[edge_type]) {
    const std::size_t p = cursor[dst]++;
    seg.source[p] = static_cast<std::uint32_t>(src_off + src);
    seg.target[p] = static_cast<std::uint32_t>(dst_off + dst);
  }
  for (std::size_t u = 0; u < n_dst; ++u) {
    const std::size_t p = seg.seg_ptr[u + 1] - 1;
    const auto gid = static_cast<std::uint32_t>(dst_off + u);
    seg.source[p] = gid;
    seg.target[p] = gid;
    seg.is_self[p] = 1;
  }
  return seg;
}

std::vector<std::size_t> k_hop_neighborhood(const HeteroGraph& g,
                                            std::size_t node, std::size_t k) {
  const std::size_t n = g.schema.total_nodes();
  if (node >= n) {
    throw RangeError("node id " + std::to_string(node) + " out of range");
  }
  // Predecessor lists: for edge src -> dst, dst hears from src.
  std::vector<std::vector<std::uint32_t>> pred(n);
  for (std::size_t e = 0; e < g.schema.edge_types.size(); ++e) {
    const auto& et = g.schema.edge_types[e];
    const std::size_t src_off = g.schema.type_offset(et.src_type);
    const std::size_t dst_off = g.schema.type_offset(et.dst_type);
    for (const auto& [src, dst] : g.edges[e]) {
      pred[dst_off + dst].push_back(static_cast<std::uint32_t>(src_off + src));
    }
  }

  std::vector<std::uint8_t> seen(n, 0);
  seen[node] = 1;
  std::vector<std::size_t> frontier{node};
  for (std::size_t hop = 0; hop < k && !frontier.empty(); ++hop) {
    std::vector<std::size_t> next;
    for (const auto u : frontier) {
      for (const auto v : pred[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n; ++u) {
    if (seen[u]) out.push_back(u);
  }
  return out;
}

EdgeTypeContext build_edge_context(const HeteroGraph& g, std::size_t edge_type) {
  EdgeTypeContext ctx;
  const auto& et = g.schema.edge_types[edge_type];
  ctx.name = et.name;
  ctx.src_type = et.src_type;
  ctx.dst_type = et.dst_type;
  ctx.adj = normalize_adjacency(g, edge_type);
  ctx.seg = build_segments(g, edge_type);

  // Strip the diagonal into a per-node weight vector, preserving the
  // iteration order of the remaining entries.
  const auto& a = ctx.adj;
  ctx.self_weight.assign(a.n_rows, 0.0);
  std::vector<SparseEntry> off;
  off.reserve(a.nnz());
  for (std::size_t r = 0; r < a.n_rows; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      if (a.iter_col[p] == r) {
        ctx.self_weight[r] = a.iter_val[p];
      } else {
        off.push_back({static_cast<std::uint32_t>(r), a.iter_col[p],
                       a.iter_val[p]});
      }
    }
  }
  ctx.adj_off = SparseAdjacency::from_entries(a.n_rows, a.n_cols, off);
  return ctx;
}

}  // namespace hetgt
