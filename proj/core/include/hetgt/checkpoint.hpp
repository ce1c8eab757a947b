// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hetgt/errors.hpp"
#include "hetgt/tensor.hpp"

namespace hetgt {

/// One named matrix in a checkpoint. Values are stored as f32 regardless of
/// the compute precision.
struct CheckpointEntry {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;  // row-major, rows*cols
};

/// File layout: magic "HGTCKPT1", u32 little-endian JSON header length, the
/// JSON header ({"dtype":"f32le","params":[{name,rows,cols,offset}...]},
/// offsets counted in elements), then the concatenated f32le payload.
void save_checkpoint(const std::string& path,
                     const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> load_checkpoint(const std::string& path);

template <class S>
std::vector<CheckpointEntry> to_checkpoint(
    const std::vector<std::pair<std::string, Tensor<S>>>& named) {
  std::vector<CheckpointEntry> out;
  out.reserve(named.size());
  for (const auto& [name, t] : named) {
    CheckpointEntry e;
    e.name = name;
    e.rows = t.rows();
    e.cols = t.cols();
    e.data.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      e.data[i] = static_cast<float>(t.data()[i]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

/// Writes checkpoint values into matching parameters, looked up by name.
/// Every parameter must be present with matching shape; extra checkpoint
/// entries are ignored.
template <class S>
void apply_checkpoint(
    const std::vector<CheckpointEntry>& entries,
    const std::vector<std::pair<std::string, Tensor<S>>>& named) {
  for (const auto& [name, t] : named) {
    const CheckpointEntry* found = nullptr;
    for (const auto& e : entries) {
      if (e.name == name) {
        found = &e;
        break;
      }
    }
    if (!found) throw DataError("checkpoint is missing parameter '" + name + "'");
    if (found->rows != t.rows() || found->cols != t.cols()) {
      throw DimensionError("checkpoint parameter '" + name + "' is " +
                           std::to_string(found->rows) + "x" +
                           std::to_string(found->cols) + ", model expects " +
                           std::to_string(t.rows()) + "x" +
                           std::to_string(t.cols()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<S>(found->data[i]);
    }
  }
}

}  // namespace hetgt
