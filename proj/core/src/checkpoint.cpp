// SPDX-License-Identifier: Apache-2.0
#include "hetgt/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace hetgt {

namespace {
constexpr char kMagic[8] = {'H', 'G', 'T', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::string& path,
                     const std::vector<CheckpointEntry>& entries) {
  nlohmann::json header;
  header["dtype"] = "f32le";
  auto& params = header["params"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    if (e.data.size() != e.rows * e.cols) {
      throw ContractError("checkpoint entry '" + e.name +
                          "' has inconsistent data size");
    }
    params.push_back({{"name", e.name},
                      {"rows", e.rows},
                      {"cols", e.cols},
                      {"offset", offset}});
    offset += e.data.size();
  }
  const std::string hs = header.dump();
  if (hs.size() > UINT32_MAX) throw DataError("checkpoint header too large");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  unsigned char lenb[4] = {
      static_cast<unsigned char>(hlen & 0xff),
      static_cast<unsigned char>((hlen >> 8) & 0xff),
      static_cast<unsigned char>((hlen >> 16) & 0xff),
      static_cast<unsigned char>((hlen >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(lenb), 4);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& e : entries) {
    out.write(reinterpret_cast<const char*>(e.data.data()),
              static_cast<std::streamsize>(e.data.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

std::vector<CheckpointEntry> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("'" + path + "' is not a checkpoint file");
  }
  unsigned char lenb[4];
  in.read(reinterpret_cast<char*>(lenb), 4);
  if (!in) throw DataError("checkpoint '" + path + "' is truncated");
  const std::uint32_t hlen = static_cast<std::uint32_t>(lenb[0]) |
                             (static_cast<std::uint32_t>(lenb[1]) << 8) |
                             (static_cast<std::uint32_t>(lenb[2]) << 16) |
                             (static_cast<std::uint32_t>(lenb[3]) << 24);
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw DataError("checkpoint '" + path + "' is truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint '" + path + "' has a bad header: " + e.what());
  }
  if (header.value("dtype", "") != "f32le") {
    throw DataError("checkpoint '" + path + "' has unsupported dtype");
  }

  std::vector<char> payload(std::istreambuf_iterator<char>(in), {});
  if (payload.size() % sizeof(float) != 0) {
    throw DataError("checkpoint '" + path + "' payload is misaligned");
  }
  const std::size_t n_floats = payload.size() / sizeof(float);

  std::vector<CheckpointEntry> out;
  for (const auto& p : header.at("params")) {
    CheckpointEntry e;
    e.name = p.at("name").get<std::string>();
    e.rows = p.at("rows").get<std::size_t>();
    e.cols = p.at("cols").get<std::size_t>();
    const auto offset = p.at("offset").get<std::size_t>();
    const std::size_t count = e.rows * e.cols;
    if (offset + count > n_floats) {
      throw DataError("checkpoint '" + path + "' payload is shorter than '" +
                      e.name + "' claims");
    }
    e.data.resize(count);
    std::memcpy(e.data.data(), payload.data() + offset * sizeof(float),
                count * sizeof(float));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace hetgt
