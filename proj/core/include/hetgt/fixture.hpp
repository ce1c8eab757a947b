// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hetgt/graph.hpp"

namespace hetgt {

/// Tiny deterministic graph used by gradient checks and hand-evaluated unit
/// cases: 2 "paper" nodes (2-dim features), 1 "author" node (3-dim), edge
/// types AP (author -> paper, edges a0->p0 and a0->p1) and PA (the reverse),
/// labels [0, 1], both papers in the train split. Global ids: p0=0, p1=1,
/// a0=2.
HeteroGraph fixture_graph();

}  // namespace hetgt
