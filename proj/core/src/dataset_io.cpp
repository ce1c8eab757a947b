// SPDX-License-Identifier: Apache-2.0
#include "hetgt/dataset_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace hetgt {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::filesystem::path& p) {
  const std::string text = read_file(p);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw DataError("'" + p.string() + "' is not valid JSON");
  }
  return j;
}

const json& require(const json& j, const char* key,
                    const std::filesystem::path& file) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw DataError("'" + file.string() + "': missing key \"" + key + "\"");
  }
  return *it;
}

/// CSV of floats, `rows` x `cols`, no header. Commas or whitespace separate
/// fields; a trailing newline is optional.
std::vector<float> read_feature_csv(const std::filesystem::path& p,
                                    std::size_t rows, std::size_t cols,
                                    const std::string& type_name) {
  const std::string text = read_file(p);
  std::vector<float> out;
  out.reserve(rows * cols);
  const char* s = text.c_str();
  std::size_t line = 1;
  std::size_t in_row = 0;
  auto row_error = [&](const std::string& what) {
    throw DataError("features of type '" + type_name + "' (" + p.string() +
                    "): row " + std::to_string(line) + " " + what);
  };
  while (*s) {
    if (*s == '\n') {
      if (in_row != 0 && in_row != cols) {
        row_error("has " + std::to_string(in_row) + " columns, expected " +
                  std::to_string(cols));
      }
      if (in_row != 0) ++line;
      in_row = 0;
      ++s;
      continue;
    }
    if (*s == ',' || *s == ' ' || *s == '\t' || *s == '\r') {
      ++s;
      continue;
    }
    char* end = nullptr;
    errno = 0;
    const float v = std::strtof(s, &end);
    if (end == s || errno == ERANGE) row_error("holds an unparseable number");
    out.push_back(v);
    ++in_row;
    s = end;
  }
  if (in_row != 0) {
    if (in_row != cols) {
      row_error("has " + std::to_string(in_row) + " columns, expected " +
                std::to_string(cols));
    }
    ++line;
  }
  if (out.size() != rows * cols) {
    throw DataError("features of type '" + type_name + "' (" + p.string() +
                    "): found " + std::to_string(line - 1) + " rows, expected " +
                    std::to_string(rows));
  }
  return out;
}

std::vector<float> read_feature_f32le(const std::filesystem::path& p,
                                      std::size_t rows, std::size_t cols,
                                      const std::string& type_name) {
  const std::string raw = read_file(p);
  if (raw.size() != rows * cols * sizeof(float)) {
    throw DataError("features of type '" + type_name + "' (" + p.string() +
                    "): " + std::to_string(raw.size()) + " bytes, expected " +
                    std::to_string(rows * cols * sizeof(float)));
  }
  std::vector<float> out(rows * cols);
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

/// Two-column CSV of non-negative integers. Returns (first, second) pairs.
std::vector<std::pair<std::uint32_t, std::uint32_t>> read_pair_csv(
    const std::filesystem::path& p, const char* what) {
  const std::string text = read_file(p);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  const char* s = text.c_str();
  std::size_t line = 1;
  while (*s) {
    while (*s == '\n' || *s == '\r') {
      if (*s == '\n') ++line;
      ++s;
    }
    if (!*s) break;
    char* end = nullptr;
    errno = 0;
    const unsigned long a = std::strtoul(s, &end, 10);
    if (end == s || errno == ERANGE) {
      throw DataError(std::string(what) + " file '" + p.string() + "': row " +
                      std::to_string(line) + " is not \"id,id\"");
    }
    s = end;
    while (*s == ',' || *s == ' ' || *s == '\t') ++s;
    errno = 0;
    const unsigned long b = std::strtoul(s, &end, 10);
    if (end == s || errno == ERANGE) {
      throw DataError(std::string(what) + " file '" + p.string() + "': row " +
                      std::to_string(line) + " is not \"id,id\"");
    }
    s = end;
    while (*s == ' ' || *s == '\t' || *s == '\r') ++s;
    if (*s && *s != '\n') {
      throw DataError(std::string(what) + " file '" + p.string() + "': row " +
                      std::to_string(line) + " has trailing junk");
    }
    out.emplace_back(static_cast<std::uint32_t>(a),
                     static_cast<std::uint32_t>(b));
  }
  return out;
}

std::vector<std::uint32_t> read_split(const json& j, const char* name,
                                      const std::filesystem::path& file) {
  const json& arr = require(j, name, file);
  if (!arr.is_array()) {
    throw DataError("'" + file.string() + "': \"" + std::string(name) +
                    "\" must be an array");
  }
  std::vector<std::uint32_t> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_unsigned()) {
      throw DataError("'" + file.string() + "': \"" + std::string(name) +
                      "\" holds a non-index value");
    }
    out.push_back(v.get<std::uint32_t>());
  }
  return out;
}

}  // namespace

HeteroGraph load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw DataError("missing manifest '" + manifest_path.string() + "'");
  }
  const json m = parse_json_file(manifest_path);

  HeteroGraph g;
  std::vector<std::string> feature_files, feature_formats;
  for (const auto& jt : require(m, "node_types", manifest_path)) {
    NodeType t;
    t.name = require(jt, "name", manifest_path).get<std::string>();
    t.count = require(jt, "count", manifest_path).get<std::size_t>();
    t.feature_dim = require(jt, "feature_dim", manifest_path).get<std::size_t>();
    feature_files.push_back(
        require(jt, "feature_file", manifest_path).get<std::string>());
    std::string fmt = "csv";
    if (auto it = jt.find("format"); it != jt.end()) fmt = it->get<std::string>();
    if (fmt != "csv" && fmt != "f32le") {
      throw DataError("'" + manifest_path.string() + "': node type '" + t.name +
                      "' declares unknown feature format '" + fmt + "'");
    }
    feature_formats.push_back(fmt);
    g.schema.node_types.push_back(std::move(t));
  }
  std::vector<std::string> edge_files;
  for (const auto& je : require(m, "edge_types", manifest_path)) {
    EdgeType e;
    e.name = require(je, "name", manifest_path).get<std::string>();
    const auto src = require(je, "src", manifest_path).get<std::string>();
    const auto dst = require(je, "dst", manifest_path).get<std::string>();
    try {
      e.src_type = g.schema.find_node_type(src);
      e.dst_type = g.schema.find_node_type(dst);
    } catch (const ConfigError& ex) {
      throw DataError("'" + manifest_path.string() + "': edge type '" + e.name +
                      "': " + ex.what());
    }
    edge_files.push_back(require(je, "edge_file", manifest_path).get<std::string>());
    g.schema.edge_types.push_back(std::move(e));
  }
  {
    const auto target = require(m, "target_type", manifest_path).get<std::string>();
    try {
      g.schema.target_type = g.schema.find_node_type(target);
    } catch (const ConfigError& ex) {
      throw DataError("'" + manifest_path.string() + "': " + std::string(ex.what()));
    }
  }
  g.schema.num_classes = require(m, "num_classes", manifest_path).get<std::size_t>();
  try {
    g.schema.validate();
  } catch (const ConfigError& ex) {
    throw DataError("'" + manifest_path.string() + "': " + std::string(ex.what()));
  }

  for (std::size_t t = 0; t < g.schema.node_types.size(); ++t) {
    const auto& nt = g.schema.node_types[t];
    const auto path = dir / feature_files[t];
    if (!std::filesystem::exists(path)) {
      throw DataError("missing feature file '" + path.string() + "' for type '" +
                      nt.name + "'");
    }
    g.features.push_back(feature_formats[t] == "csv"
                             ? read_feature_csv(path, nt.count, nt.feature_dim, nt.name)
                             : read_feature_f32le(path, nt.count, nt.feature_dim, nt.name));
  }

  for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
    const auto path = dir / edge_files[k];
    if (!std::filesystem::exists(path)) {
      throw DataError("missing edge file '" + path.string() + "' for edge type '" +
                      g.schema.edge_types[k].name + "'");
    }
    g.edges.push_back(read_pair_csv(path, "edge"));
  }

  // Labels: "local_id,label", each target node exactly once.
  {
    const auto labels_file = require(m, "labels_file", manifest_path).get<std::string>();
    const auto path = dir / labels_file;
    if (!std::filesystem::exists(path)) {
      throw DataError("missing labels file '" + path.string() + "'");
    }
    const std::size_t n = g.schema.node_types[g.schema.target_type].count;
    g.labels.assign(n, -1);
    const auto rows = read_pair_csv(path, "labels");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto [u, label] = rows[i];
      if (u >= n) {
        throw DataError("labels file '" + path.string() + "': row " +
                        std::to_string(i + 1) + " names node " +
                        std::to_string(u) + " outside the target type");
      }
      if (g.labels[u] != -1) {
        throw DataError("labels file '" + path.string() + "': node " +
                        std::to_string(u) + " labeled twice");
      }
      if (label >= g.schema.num_classes) {
        throw DataError("labels file '" + path.string() + "': row " +
                        std::to_string(i + 1) + " has label " +
                        std::to_string(label) + " outside [0," +
                        std::to_string(g.schema.num_classes) + ")");
      }
      g.labels[u] = static_cast<std::int32_t>(label);
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (g.labels[u] == -1) {
        throw DataError("labels file '" + path.string() + "': node " +
                        std::to_string(u) + " has no label");
      }
    }
  }

  {
    const auto splits_file = require(m, "splits_file", manifest_path).get<std::string>();
    const auto path = dir / splits_file;
    if (!std::filesystem::exists(path)) {
      throw DataError("missing splits file '" + path.string() + "'");
    }
    const json js = parse_json_file(path);
    g.splits.train = read_split(js, "train", path);
    g.splits.val = read_split(js, "val", path);
    g.splits.test = read_split(js, "test", path);
  }

  try {
    g.validate_structure();
  } catch (const StructureError& ex) {
    throw DataError("dataset '" + dir.string() + "': " + std::string(ex.what()));
  }
  return g;
}

void write_dataset(const HeteroGraph& g, const std::filesystem::path& dir,
                   const std::map<std::string, std::string>& feature_formats) {
  std::filesystem::create_directories(dir);
  json m;
  m["node_types"] = json::array();
  for (std::size_t t = 0; t < g.schema.node_types.size(); ++t) {
    const auto& nt = g.schema.node_types[t];
    std::string fmt = "csv";
    if (auto it = feature_formats.find(nt.name); it != feature_formats.end()) {
      fmt = it->second;
      if (fmt != "csv" && fmt != "f32le") {
        throw ConfigError("unknown feature format '" + fmt + "' for type '" +
                          nt.name + "'");
      }
    }
    const std::string fname =
        "features_" + nt.name + (fmt == "csv" ? ".csv" : ".f32");
    m["node_types"].push_back({{"name", nt.name},
                               {"count", nt.count},
                               {"feature_dim", nt.feature_dim},
                               {"feature_file", fname},
                               {"format", fmt}});
    const auto path = dir / fname;
    if (fmt == "csv") {
      std::string buf;
      char num[48];
      const auto& x = g.features[t];
      for (std::size_t i = 0; i < nt.count; ++i) {
        for (std::size_t j = 0; j < nt.feature_dim; ++j) {
          // %.9g round-trips any float exactly.
          std::snprintf(num, sizeof num, "%.9g", static_cast<double>(x[i * nt.feature_dim + j]));
          if (j) buf += ',';
          buf += num;
        }
        buf += '\n';
      }
      std::ofstream out(path, std::ios::binary);
      if (!out) throw DataError("cannot write '" + path.string() + "'");
      out << buf;
    } else {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw DataError("cannot write '" + path.string() + "'");
      out.write(reinterpret_cast<const char*>(g.features[t].data()),
                static_cast<std::streamsize>(g.features[t].size() * sizeof(float)));
    }
  }

  m["edge_types"] = json::array();
  for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
    const auto& et = g.schema.edge_types[k];
    const std::string fname = "edges_" + et.name + ".csv";
    m["edge_types"].push_back({{"name", et.name},
                               {"src", g.schema.node_types[et.src_type].name},
                               {"dst", g.schema.node_types[et.dst_type].name},
                               {"edge_file", fname}});
    std::ofstream out(dir / fname, std::ios::binary);
    if (!out) throw DataError("cannot write '" + (dir / fname).string() + "'");
    for (const auto& [src, dst] : g.edges[k]) {
      out << src << ',' << dst << '\n';
    }
  }

  m["target_type"] = g.schema.node_types[g.schema.target_type].name;
  m["num_classes"] = g.schema.num_classes;
  m["labels_file"] = "labels.csv";
  m["splits_file"] = "splits.json";

  {
    std::ofstream out(dir / "labels.csv", std::ios::binary);
    if (!out) throw DataError("cannot write labels.csv");
    for (std::size_t u = 0; u < g.labels.size(); ++u) {
      out << u << ',' << g.labels[u] << '\n';
    }
  }
  {
    json js;
    js["train"] = g.splits.train;
    js["val"] = g.splits.val;
    js["test"] = g.splits.test;
    std::ofstream out(dir / "splits.json", std::ios::binary);
    if (!out) throw DataError("cannot write splits.json");
    out << js.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw DataError("cannot write manifest.json");
    out << m.dump(2) << '\n';
  }
}

}  // namespace hetgt
