// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetgt/errors.hpp"

namespace hetgt {

struct NodeType {
  std::string name;
  std::size_t count = 0;
  std::size_t feature_dim = 0;

  bool operator==(const NodeType&) const = default;
};

struct EdgeType {
  std::string name;
  std::size_t src_type = 0;  // index into Schema::node_types
  std::size_t dst_type = 0;

  bool operator==(const EdgeType&) const = default;
};

/// Typed-graph shape: node types in declaration order (which fixes the
/// global index layout), directed edge types, the labeled target type, and
/// the class count. Reverse relations are separate edge types.
struct Schema {
  std::vector<NodeType> node_types;
  std::vector<EdgeType> edge_types;
  std::size_t target_type = 0;
  std::size_t num_classes = 0;

  bool operator==(const Schema&) const = default;

  std::size_t find_node_type(std::string_view name) const;
  std::size_t find_edge_type(std::string_view name) const;

  /// Global ids are laid out as contiguous blocks per type, in schema order.
  std::size_t type_offset(std::size_t type) const;
  std::pair<std::size_t, std::size_t> type_range(std::size_t type) const;
  std::size_t global_id(std::size_t type, std::size_t local) const;
  std::size_t total_nodes() const;

  /// Number of edge types whose destination is `type`.
  std::size_t incoming_edge_types(std::size_t type) const;

  /// Full structural validation, including the heterogeneity requirement
  /// |node types| + |edge types| > 2. In-memory construction may skip this
  /// (unit fixtures include homogeneous graphs); loaders must call it.
  void validate() const;
};

}  // namespace hetgt
