// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hetgt/schema.hpp"

namespace hetgt {

struct Splits {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
  std::vector<std::uint32_t> test;

  bool operator==(const Splits&) const = default;
};

/// In-memory heterogeneous graph. Immutable by convention once built; all
/// downstream structures (adjacency, segments, prepared features) copy or
/// reference it read-only.
struct HeteroGraph {
  Schema schema;
  /// Per node type: count x feature_dim row-major. Stored as float to match
  /// the on-disk f32 formats bit-exactly; compute kernels upcast on entry.
  std::vector<std::vector<float>> features;
  /// Per edge type: directed (src local id, dst local id) pairs, in file or
  /// generation order. Order is semantically irrelevant but preserved so
  /// folds and round-trips are reproducible.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> edges;
  /// Per target-type node, in [0, num_classes).
  std::vector<std::int32_t> labels;
  /// Index lists over target-type local ids, pairwise disjoint.
  Splits splits;

  bool operator==(const HeteroGraph&) const = default;

  std::size_t edge_count(std::size_t edge_type) const {
    return edges[edge_type].size();
  }

  /// Checks every structural invariant (schema validity included).
  void validate() const;

  /// Shape checks only, without the schema-level heterogeneity rule; for
  /// in-memory fixtures such as single-relation reduction graphs.
  void validate_structure() const;
};

}  // namespace hetgt
