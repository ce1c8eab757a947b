// SPDX-License-Identifier: Apache-2.0
#include "hetgt/fixture.hpp"

namespace hetgt {

HeteroGraph fixture_graph() {
  HeteroGraph g;
  g.schema.node_types = {{"paper", 2, 2}, {"author", 1, 3}};
  g.schema.edge_types = {{"AP", 1, 0}, {"PA", 0, 1}};
  g.schema.target_type = 0;
  g.schema.num_classes = 2;
  g.features = {{0.9f, -0.2f, 0.1f, 0.7f}, {0.5f, -0.3f, 0.8f}};
  g.edges = {{{0, 0}, {0, 1}},   // AP: a0->p0, a0->p1
             {{0, 0}, {1, 0}}};  // PA: p0->a0, p1->a0
  g.labels = {0, 1};
  g.splits.train = {0, 1};
  g.validate();
  return g;
}

}  // namespace hetgt
