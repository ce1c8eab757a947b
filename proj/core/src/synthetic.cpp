// SPDX-License-Identifier: Apache-2.0
#include "hetgt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hetgt/rng.hpp"

namespace hetgt {

namespace {

constexpr double kHomophily = 0.8;       // chance a drawn source shares the
                                         // destination's latent class
constexpr double kMixNoise = 0.4;        // noise added to mixed features
constexpr double kIsolatedNoise = 1.0;   // feature scale for neighborless nodes

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes < 2) {
    throw ConfigError("synthetic spec: num_classes must be at least 2");
  }
  if (node_types.empty()) {
    throw ConfigError("synthetic spec: no node types");
  }
  for (const auto& t : node_types) {
    if (t.name.empty()) throw ConfigError("synthetic spec: empty node type name");
    if (t.count < 1) {
      throw ConfigError("synthetic spec: node type '" + t.name + "' has count 0");
    }
    if (t.feature_dim < 1) {
      throw ConfigError("synthetic spec: node type '" + t.name + "' has feature_dim 0");
    }
  }
  if (signal < 0.0) {
    throw ConfigError("synthetic spec: signal strength must be >= 0");
  }
  bool target_found = false;
  std::size_t target_count = 0;
  for (const auto& t : node_types) {
    if (t.name == target_type) {
      target_found = true;
      target_count = t.count;
    }
  }
  if (!target_found) {
    throw ConfigError("synthetic spec: target type '" + target_type +
                      "' is not a declared node type");
  }
  for (const auto& e : edge_types) {
    if (e.expected_degree < 0.0) {
      throw ConfigError("synthetic spec: edge type '" + e.name +
                        "' has negative expected degree");
    }
    bool src_ok = false, dst_ok = false;
    for (const auto& t : node_types) {
      src_ok |= t.name == e.src;
      dst_ok |= t.name == e.dst;
    }
    if (!src_ok || !dst_ok) {
      throw ConfigError("synthetic spec: edge type '" + e.name +
                        "' references an undeclared node type");
    }
  }
  const std::size_t per_class = target_count / num_classes;
  if (per_class <= train_per_class + val_per_class) {
    throw ConfigError(
        "synthetic spec: each class needs more than train_per_class + "
        "val_per_class target nodes");
  }
}

HeteroGraph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();

  HeteroGraph g;
  for (const auto& t : spec.node_types) {
    g.schema.node_types.push_back({t.name, t.count, t.feature_dim});
  }
  for (const auto& e : spec.edge_types) {
    g.schema.edge_types.push_back({e.name, g.schema.find_node_type(e.src),
                                   g.schema.find_node_type(e.dst)});
  }
  g.schema.target_type = g.schema.find_node_type(spec.target_type);
  g.schema.num_classes = spec.num_classes;

  const std::size_t n_types = g.schema.node_types.size();
  const std::size_t C = spec.num_classes;

  // Latent class per node of every type: balanced round-robin, shuffled.
  std::vector<std::vector<std::uint32_t>> latent(n_types);
  std::vector<std::vector<std::vector<std::uint32_t>>> by_class(n_types);
  for (std::size_t t = 0; t < n_types; ++t) {
    const std::size_t n = g.schema.node_types[t].count;
    latent[t].resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      latent[t][u] = static_cast<std::uint32_t>(u % C);
    }
    Rng r = Rng::keyed(spec.seed, "latent/" + g.schema.node_types[t].name);
    r.shuffle(latent[t]);
    by_class[t].resize(C);
    for (std::size_t u = 0; u < n; ++u) {
      by_class[t][latent[t][u]].push_back(static_cast<std::uint32_t>(u));
    }
  }

  // Target features: class mean (signal/sqrt(2)) * e_c plus unit noise, so
  // two class means sit exactly `signal` apart.
  const std::size_t tt = g.schema.target_type;
  g.features.resize(n_types);
  {
    const auto& nt = g.schema.node_types[tt];
    Rng r = Rng::keyed(spec.seed, "feat/" + nt.name);
    auto& x = g.features[tt];
    x.resize(nt.count * nt.feature_dim);
    const double mean_len = spec.signal / std::sqrt(2.0);
    for (std::size_t u = 0; u < nt.count; ++u) {
      const std::size_t axis = latent[tt][u] % nt.feature_dim;
      for (std::size_t j = 0; j < nt.feature_dim; ++j) {
        double v = r.normal();
        if (j == axis) v += mean_len;
        x[u * nt.feature_dim + j] = static_cast<float>(v);
      }
    }
  }

  // Edges: per dst node, Poisson(expected_degree) distinct sources with a
  // homophily preference for the destination's latent class.
  g.edges.resize(g.schema.edge_types.size());
  for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
    const auto& et = g.schema.edge_types[k];
    const std::size_t src_n = g.schema.node_types[et.src_type].count;
    const std::size_t dst_n = g.schema.node_types[et.dst_type].count;
    Rng r = Rng::keyed(spec.seed, "edges/" + et.name);
    auto& list = g.edges[k];
    for (std::size_t v = 0; v < dst_n; ++v) {
      std::size_t want = std::min(r.poisson(spec.edge_types[k].expected_degree), src_n);
      const auto& same = by_class[et.src_type][latent[et.dst_type][v]];
      std::unordered_set<std::uint32_t> used;
      std::size_t attempts = 0;
      const std::size_t cap = 4 * want + 16;
      while (used.size() < want && attempts < cap) {
        ++attempts;
        std::uint32_t cand;
        if (!same.empty() && r.uniform() < kHomophily) {
          cand = same[r.index(same.size())];
        } else {
          cand = static_cast<std::uint32_t>(r.index(src_n));
        }
        if (used.insert(cand).second) {
          list.emplace_back(cand, static_cast<std::uint32_t>(v));
        }
      }
    }
  }

  // Non-target features: mean of adjacent target features (any edge type,
  // either direction) plus noise; pure noise when no target neighbors.
  const std::size_t target_dim = g.schema.node_types[tt].feature_dim;
  for (std::size_t t = 0; t < n_types; ++t) {
    if (t == tt) continue;
    const auto& nt = g.schema.node_types[t];
    std::vector<std::vector<std::uint32_t>> target_nbrs(nt.count);
    for (std::size_t k = 0; k < g.schema.edge_types.size(); ++k) {
      const auto& et = g.schema.edge_types[k];
      if (et.src_type == t && et.dst_type == tt) {
        for (const auto& [src, dst] : g.edges[k]) target_nbrs[src].push_back(dst);
      } else if (et.src_type == tt && et.dst_type == t) {
        for (const auto& [src, dst] : g.edges[k]) target_nbrs[dst].push_back(src);
      }
    }
    Rng r = Rng::keyed(spec.seed, "feat/" + nt.name);
    auto& x = g.features[t];
    x.resize(nt.count * nt.feature_dim);
    const auto& xt = g.features[tt];
    for (std::size_t u = 0; u < nt.count; ++u) {
      const auto& nbrs = target_nbrs[u];
      for (std::size_t j = 0; j < nt.feature_dim; ++j) {
        double v;
        if (nbrs.empty()) {
          v = kIsolatedNoise * r.normal();
        } else {
          double acc = 0.0;
          for (const auto nb : nbrs) {
            acc += xt[static_cast<std::size_t>(nb) * target_dim + j % target_dim];
          }
          v = acc / static_cast<double>(nbrs.size()) + kMixNoise * r.normal();
        }
        x[u * nt.feature_dim + j] = static_cast<float>(v);
      }
    }
  }

  // Labels are the target type's latent classes.
  g.labels.resize(g.schema.node_types[tt].count);
  for (std::size_t u = 0; u < g.labels.size(); ++u) {
    g.labels[u] = static_cast<std::int32_t>(latent[tt][u]);
  }

  // Balanced splits: per class, shuffled members -> train / val / test.
  {
    Rng r = Rng::keyed(spec.seed, "splits");
    for (std::size_t c = 0; c < C; ++c) {
      auto members = by_class[tt][c];
      r.shuffle(members);
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (i < spec.train_per_class) {
          g.splits.train.push_back(members[i]);
        } else if (i < spec.train_per_class + spec.val_per_class) {
          g.splits.val.push_back(members[i]);
        } else {
          g.splits.test.push_back(members[i]);
        }
      }
    }
    std::sort(g.splits.train.begin(), g.splits.train.end());
    std::sort(g.splits.val.begin(), g.splits.val.end());
    std::sort(g.splits.test.begin(), g.splits.test.end());
  }

  g.validate_structure();
  return g;
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec s;
  s.node_types = {{"paper", 500, 16}, {"author", 300, 16}, {"subject", 30, 16}};
  s.edge_types = {{"AP", "author", "paper", 4.0},
                  {"PA", "paper", "author", 3.0},
                  {"SP", "subject", "paper", 2.0},
                  {"PS", "paper", "subject", 12.0}};
  s.target_type = "paper";
  s.num_classes = 3;
  s.signal = 4.0;
  s.seed = 7;
  s.train_per_class = 30;
  s.val_per_class = 15;
  return s;
}

}  // namespace hetgt
