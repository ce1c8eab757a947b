// SPDX-License-Identifier: Apache-2.0
#include "hetgt/sparse.hpp"

#include <algorithm>
#include <string>

namespace hetgt {

SparseAdjacency SparseAdjacency::from_entries(
    std::size_t n_rows, std::size_t n_cols,
    const std::vector<SparseEntry>& entries) {
  SparseAdjacency m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_ptr.assign(n_rows + 1, 0);

  for (const auto& e : entries) {
    if (e.row >= n_rows || e.col >= n_cols) {
      throw StructureError("sparse entry (" + std::to_string(e.row) + "," +
                           std::to_string(e.col) + ") outside " +
                           std::to_string(n_rows) + "x" +
                           std::to_string(n_cols));
    }
    ++m.row_ptr[e.row + 1];
  }
  for (std::size_t r = 0; r < n_rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];

  const std::size_t nnz = entries.size();
  m.iter_col.resize(nnz);
  m.iter_val.resize(nnz);
  // Stable bucket fill keeps each row's entries in insertion order.
  std::vector<std::size_t> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
  for (const auto& e : entries) {
    const std::size_t p = cursor[e.row]++;
    m.iter_col[p] = e.col;
    m.iter_val[p] = e.value;
  }

  // Canonical view: per-row sort by column.
  m.col_idx.resize(nnz);
  m.values.resize(nnz);
  std::vector<std::uint32_t> order;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t b = m.row_ptr[r], e = m.row_ptr[r + 1];
    order.resize(e - b);
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = static_cast<std::uint32_t>(b + i);
    }
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t x, std::uint32_t y) {
                return m.iter_col[x] < m.iter_col[y];
              });
    for (std::size_t i = 0; i < order.size(); ++i) {
      m.col_idx[b + i] = m.iter_col[order[i]];
      m.values[b + i] = m.iter_val[order[i]];
      if (i > 0 && m.col_idx[b + i] == m.col_idx[b + i - 1]) {
        throw StructureError("duplicate sparse entry at row " +
                             std::to_string(r) + ", col " +
                             std::to_string(m.col_idx[b + i]));
      }
    }
  }

  // Transpose in canonical order: walking rows ascending over the canonical
  // view leaves each transpose row's columns ascending as well.
  m.t_row_ptr.assign(n_cols + 1, 0);
  for (const auto c : m.col_idx) ++m.t_row_ptr[c + 1];
  for (std::size_t c = 0; c < n_cols; ++c) m.t_row_ptr[c + 1] += m.t_row_ptr[c];
  m.t_col.resize(nnz);
  m.t_val.resize(nnz);
  std::vector<std::size_t> tcur(m.t_row_ptr.begin(), m.t_row_ptr.end() - 1);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
      const std::size_t q = tcur[m.col_idx[p]]++;
      m.t_col[q] = static_cast<std::uint32_t>(r);
      m.t_val[q] = m.values[p];
    }
  }
  return m;
}

std::vector<double> SparseAdjacency::to_dense() const {
  std::vector<double> d(n_rows * n_cols, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      d[r * n_cols + col_idx[p]] = values[p];
    }
  }
  return d;
}

void SparseAdjacency::validate() const {
  if (row_ptr.size() != n_rows + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != col_idx.size()) {
    throw StructureError("row_ptr inconsistent with entry count");
  }
  if (col_idx.size() != values.size() || iter_col.size() != col_idx.size() ||
      iter_val.size() != col_idx.size() || t_col.size() != col_idx.size() ||
      t_val.size() != col_idx.size()) {
    throw StructureError("sparse views disagree on entry count");
  }
  if (t_row_ptr.size() != n_cols + 1) {
    throw StructureError("transpose row_ptr has wrong length");
  }
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) {
      throw StructureError("row_ptr not monotone");
    }
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (col_idx[p] >= n_cols) throw StructureError("column out of range");
      if (p > row_ptr[r] && col_idx[p] <= col_idx[p - 1]) {
        throw StructureError("canonical columns not strictly ascending");
      }
    }
  }
  // Both views must hold the same multiset per row.
  std::vector<std::pair<std::uint32_t, double>> a, b;
  for (std::size_t r = 0; r < n_rows; ++r) {
    a.clear();
    b.clear();
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      a.emplace_back(col_idx[p], values[p]);
      b.emplace_back(iter_col[p], iter_val[p]);
    }
    std::sort(b.begin(), b.end());
    if (a != b) throw StructureError("iteration view mismatches canonical");
  }
}

void SegmentIndex::validate() const {
  const std::size_t e = entries();
  if (target.size() != e || is_self.size() != e) {
    throw StructureError("segment arrays disagree on entry count");
  }
  if (seg_ptr.size() != segments() + 1 || seg_ptr.front() != 0 ||
      seg_ptr.back() != e) {
    throw StructureError("seg_ptr inconsistent with entry count");
  }
  for (std::size_t s = 0; s < segments(); ++s) {
    const std::size_t b = seg_ptr[s], t = seg_ptr[s + 1];
    if (b >= t) throw StructureError("empty segment");
    std::size_t selfs = 0;
    for (std::size_t p = b; p < t; ++p) {
      if (source[p] >= n_nodes || target[p] >= n_nodes) {
        throw StructureError("segment entry node out of range");
      }
      if (target[p] != seg_target[s]) {
        throw StructureError("segment entry targets a foreign node");
      }
      if (is_self[p]) {
        ++selfs;
        if (source[p] != target[p]) {
          throw StructureError("self entry with source != target");
        }
        if (p + 1 != t) throw StructureError("self entry not last in segment");
      }
    }
    if (selfs != 1) throw StructureError("segment must hold exactly one self entry");
  }
}

}  // namespace hetgt
