// SPDX-License-Identifier: Apache-2.0
#include "hetgt/schema.hpp"

#include <unordered_set>

namespace hetgt {

std::size_t Schema::find_node_type(std::string_view name) const {
  for (std::size_t i = 0; i < node_types.size(); ++i) {
    if (node_types[i].name == name) return i;
  }
  throw ConfigError("unknown node type '" + std::string(name) + "'");
}

std::size_t Schema::find_edge_type(std::string_view name) const {
  for (std::size_t i = 0; i < edge_types.size(); ++i) {
    if (edge_types[i].name == name) return i;
  }
  throw ConfigError("unknown edge type '" + std::string(name) + "'");
}

std::size_t Schema::type_offset(std::size_t type) const {
  if (type >= node_types.size()) throw RangeError("node type index out of range");
  std::size_t off = 0;
  for (std::size_t i = 0; i < type; ++i) off += node_types[i].count;
  return off;
}

std::pair<std::size_t, std::size_t> Schema::type_range(std::size_t type) const {
  const std::size_t off = type_offset(type);
  return {off, off + node_types[type].count};
}

std::size_t Schema::global_id(std::size_t type, std::size_t local) const {
  if (type >= node_types.size()) throw RangeError("node type index out of range");
  if (local >= node_types[type].count) {
    throw RangeError("local id " + std::to_string(local) + " out of range for type '" +
                     node_types[type].name + "'");
  }
  return type_offset(type) + local;
}

std::size_t Schema::total_nodes() const {
  std::size_t n = 0;
  for (const auto& t : node_types) n += t.count;
  return n;
}

std::size_t Schema::incoming_edge_types(std::size_t type) const {
  std::size_t k = 0;
  for (const auto& e : edge_types) {
    if (e.dst_type == type) ++k;
  }
  return k;
}

void Schema::validate() const {
  if (node_types.empty()) throw ConfigError("schema declares no node types");
  std::unordered_set<std::string> names;
  for (const auto& t : node_types) {
    if (t.name.empty()) throw ConfigError("node type with empty name");
    if (!names.insert(t.name).second) {
      throw ConfigError("duplicate node type name '" + t.name + "'");
    }
    if (t.count == 0) {
      throw ConfigError("node type '" + t.name + "' has count 0");
    }
    if (t.feature_dim == 0) {
      throw ConfigError("node type '" + t.name + "' has feature_dim 0");
    }
  }
  names.clear();
  for (const auto& e : edge_types) {
    if (e.name.empty()) throw ConfigError("edge type with empty name");
    if (!names.insert(e.name).second) {
      throw ConfigError("duplicate edge type name '" + e.name + "'");
    }
    if (e.src_type >= node_types.size() || e.dst_type >= node_types.size()) {
      throw ConfigError("edge type '" + e.name + "' references an undeclared node type");
    }
  }
  if (target_type >= node_types.size()) {
    throw ConfigError("target_type index out of range");
  }
  if (num_classes < 2) {
    throw ConfigError("num_classes must be at least 2");
  }
  if (node_types.size() + edge_types.size() <= 2) {
    throw ConfigError(
        "graph is not heterogeneous: need more than 2 node plus edge types");
  }
}

}  // namespace hetgt
