// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "hetgt/graph.hpp"

namespace hetgt {

/// Loads a dataset directory:
///   manifest.json        - schema, file references, target type, classes
///   per-type features    - CSV (decimal text) or f32le (raw little-endian)
///   per-edge-type edges  - CSV "src_local_id,dst_local_id", 0-based
///   labels               - CSV "local_id,label", covering every target node
///   splits               - JSON {"train":[...],"val":[...],"test":[...]}
/// Every schema and graph invariant is validated; failures throw DataError
/// naming the offending file (and row where applicable).
HeteroGraph load_dataset(const std::filesystem::path& dir);

/// Writes `g` in the same layout. `feature_formats` optionally picks
/// "csv" (default) or "f32le" per node type name. Deterministic: identical
/// graphs produce byte-identical directories, and CSV floats are printed
/// with enough digits to round-trip exactly.
void write_dataset(const HeteroGraph& g, const std::filesystem::path& dir,
                   const std::map<std::string, std::string>& feature_formats = {});

}  // namespace hetgt
