// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <tuple>
#include <vector>

#include "hetgt/errors.hpp"

namespace hetgt {

/// One weighted entry of a sparse matrix: (row, col, value).
struct SparseEntry {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

/// CSR sparse matrix with two column views sharing one row_ptr:
///   * col_idx/values     - canonical view, columns strictly ascending per
///                          row (duplicates are rejected at construction);
///   * iter_col/iter_val  - iteration view, entries in the order they were
///                          inserted. Kernels fold rows in this order, so a
///                          relabeling of nodes permutes whole folds but
///                          never reassociates one, which keeps results
///                          exactly permutation-equivariant.
/// A CSC-style transpose is precomputed for backward products.
struct SparseAdjacency {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  std::vector<std::size_t> row_ptr;    // size n_rows + 1
  std::vector<std::uint32_t> col_idx;  // canonical, ascending per row
  std::vector<double> values;

  std::vector<std::uint32_t> iter_col;  // insertion order per row
  std::vector<double> iter_val;

  std::vector<std::size_t> t_row_ptr;  // transpose, canonical order
  std::vector<std::uint32_t> t_col;
  std::vector<double> t_val;

  std::size_t nnz() const { return col_idx.size(); }

  /// Builds from an entry list. Relative order of a row's entries is kept
  /// for the iteration view. Throws StructureError on out-of-range indices
  /// or duplicate (row, col) pairs.
  static SparseAdjacency from_entries(std::size_t n_rows, std::size_t n_cols,
                                      const std::vector<SparseEntry>& entries);

  /// Dense row-major copy, for small oracles and debugging.
  std::vector<double> to_dense() const;

  /// Checks every structural invariant; throws StructureError on violation.
  void validate() const;
};

/// Flat segment layout for per-destination attention. Entry e contributes
/// source(e) -> target(e); entries of one destination node form segment s =
/// [seg_ptr[s], seg_ptr[s+1]) with seg_target[s] as the shared destination.
/// Within a segment, edge entries keep edge-list order and the self entry
/// (is_self = 1, source == target) is last. Every segment has exactly one
/// self entry, so no segment is empty.
struct SegmentIndex {
  std::size_t n_nodes = 0;  // addressable node count (output rows)

  std::vector<std::size_t> seg_ptr;       // size n_segments + 1
  std::vector<std::uint32_t> seg_target;  // size n_segments
  std::vector<std::uint32_t> source;      // per entry
  std::vector<std::uint32_t> target;      // per entry
  std::vector<std::uint8_t> is_self;      // per entry

  std::size_t segments() const { return seg_target.size(); }
  std::size_t entries() const { return source.size(); }

  void validate() const;
};

}  // namespace hetgt
