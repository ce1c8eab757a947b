// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetgt/graph.hpp"

namespace hetgt {

/// Recipe for a deterministic random heterogeneous graph with a planted
/// class structure: every node carries a latent class; target features are
/// class-conditional Gaussians whose means sit `signal` apart; edges prefer
/// same-class endpoints; non-target features are the mean of adjacent
/// target features plus noise (so neighbor aggregation genuinely denoises).
struct SyntheticSpec {
  struct NodeSpec {
    std::string name;
    std::size_t count = 0;
    std::size_t feature_dim = 0;
  };
  struct EdgeSpec {
    std::string name;
    std::string src;
    std::string dst;
    double expected_degree = 0.0;  // mean incoming degree per dst node
  };

  std::vector<NodeSpec> node_types;
  std::vector<EdgeSpec> edge_types;
  std::string target_type;
  std::size_t num_classes = 2;
  double signal = 1.0;  // distance between class-conditional feature means
  std::uint64_t seed = 0;
  std::size_t train_per_class = 20;
  std::size_t val_per_class = 10;

  void validate() const;
};

/// Same spec + same seed -> byte-identical graph.
HeteroGraph generate_synthetic(const SyntheticSpec& spec);

/// Three node types, four edge types (forward + reverse pairs), 500 target
/// nodes: the desk-scale benchmark shape used by the learning and depth
/// tests.
SyntheticSpec default_synthetic_spec();

}  // namespace hetgt
