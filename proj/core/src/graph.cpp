// SPDX-License-Identifier: Apache-2.0
#include "hetgt/graph.hpp"

#include <string>
#include <vector>

namespace hetgt {

namespace {

void check_split(const std::vector<std::uint32_t>& idx, const char* name,
                 std::size_t n_targets, std::vector<std::uint8_t>& seen) {
  for (const auto u : idx) {
    if (u >= n_targets) {
      throw StructureError(std::string("split '") + name + "' references node " +
                           std::to_string(u) + " outside the target type");
    }
    if (seen[u]) {
      throw StructureError(std::string("node ") + std::to_string(u) +
                           " appears in more than one split (latest: '" + name +
                           "')");
    }
    seen[u] = 1;
  }
}

}  // namespace

void HeteroGraph::validate_structure() const {
  const auto& s = schema;
  if (features.size() != s.node_types.size()) {
    throw StructureError("feature block count does not match node type count");
  }
  for (std::size_t t = 0; t < s.node_types.size(); ++t) {
    const auto& nt = s.node_types[t];
    if (features[t].size() != nt.count * nt.feature_dim) {
      throw StructureError("features of type '" + nt.name + "' hold " +
                           std::to_string(features[t].size()) +
                           " values, expected " +
                           std::to_string(nt.count * nt.feature_dim));
    }
  }
  if (edges.size() != s.edge_types.size()) {
    throw StructureError("edge list count does not match edge type count");
  }
  for (std::size_t k = 0; k < s.edge_types.size(); ++k) {
    const auto& et = s.edge_types[k];
    const std::size_t src_n = s.node_types[et.src_type].count;
    const std::size_t dst_n = s.node_types[et.dst_type].count;
    for (const auto& [src, dst] : edges[k]) {
      if (src >= src_n || dst >= dst_n) {
        throw StructureError("edge (" + std::to_string(src) + "," +
                             std::to_string(dst) + ") of type '" + et.name +
                             "' is out of range");
      }
    }
  }
  const std::size_t n_targets = s.node_types[s.target_type].count;
  if (labels.size() != n_targets) {
    throw StructureError("label count " + std::to_string(labels.size()) +
                         " does not cover the " + std::to_string(n_targets) +
                         " target nodes");
  }
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (labels[u] < 0 || static_cast<std::size_t>(labels[u]) >= s.num_classes) {
      throw StructureError("label " + std::to_string(labels[u]) + " of node " +
                           std::to_string(u) + " outside [0," +
                           std::to_string(s.num_classes) + ")");
    }
  }
  std::vector<std::uint8_t> seen(n_targets, 0);
  check_split(splits.train, "train", n_targets, seen);
  check_split(splits.val, "val", n_targets, seen);
  check_split(splits.test, "test", n_targets, seen);
}

void HeteroGraph::validate() const {
  schema.validate();
  validate_structure();
}

}  // namespace hetgt
