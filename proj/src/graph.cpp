// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/graph.hpp"

#include <algorithm>
#include <iterator>

namespace leftnet {

std::pair<std::vector<Vec3>, Vec3> centralize(std::span<const Vec3> positions) {
  if (positions.empty()) throw EmptyGraph("centralize: no positions");
  Vec3 mean{};
  for (const auto& p : positions) mean += p;
  mean = mean / static_cast<double>(positions.size());
  std::vector<Vec3> out;
  out.reserve(positions.size());
  for (const auto& p : positions) out.push_back(p - mean);
  return {std::move(out), mean};
}

std::vector<Edge> radius_edges(std::span<const Vec3> positions, double cutoff) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("radius_edges: cutoff must be positive");
  const int n = static_cast<int>(positions.size());
  std::vector<Edge> edges;
  const double c2 = cutoff * cutoff;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (squared_norm(positions[ui] - positions[uj]) <= c2) edges.emplace_back(i, j);
    }
  }
  return edges;
}

GeometricGraph build_radius_graph(std::span<const Vec3> positions, double cutoff,
                                  std::vector<int> atomic_numbers) {
  GeometricGraph g;
  g.positions.assign(positions.begin(), positions.end());
  if (atomic_numbers.empty()) atomic_numbers.assign(positions.size(), 0);
  if (atomic_numbers.size() != positions.size()) {
    throw std::invalid_argument("build_radius_graph: atomic_numbers size mismatch");
  }
  g.atomic_numbers = std::move(atomic_numbers);
  for (int z : g.atomic_numbers) g.node_features.push_back({static_cast<double>(z)});
  g.edges = radius_edges(positions, cutoff);
  g.cutoff = cutoff;
  return g;
}

GeometricGraph transformed(const GeometricGraph& graph, const RigidMotion& g) {
  GeometricGraph out = graph;
  out.positions = apply_motion(g, graph.positions);
  return out;
}

int Topology::find_edge(int i, int j) const {
  if (i < 0 || i >= num_nodes) return -1;
  const auto& nb = neighbors[static_cast<std::size_t>(i)];
  const auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return -1;
  return edge_ids[static_cast<std::size_t>(i)][static_cast<std::size_t>(it - nb.begin())];
}

Topology build_topology(const GeometricGraph& graph) {
  Topology t;
  t.num_nodes = graph.num_nodes();
  t.edges = graph.edges;
  const auto n = static_cast<std::size_t>(t.num_nodes);
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto [i, j] = graph.edges[e];
    if (i < 0 || j < 0 || i >= t.num_nodes || j >= t.num_nodes || i == j) {
      throw std::invalid_argument("build_topology: invalid edge");
    }
    adj[static_cast<std::size_t>(i)].emplace_back(j, static_cast<int>(e));
  }
  t.neighbors.resize(n);
  t.edge_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    for (const auto& [j, e] : adj[i]) {
      t.neighbors[i].push_back(j);
      t.edge_ids[i].push_back(e);
    }
  }
  t.common.resize(graph.edges.size());
  t.common_edge.resize(graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto [i, j] = graph.edges[e];
    const auto& ni = t.neighbors[static_cast<std::size_t>(i)];
    const auto& nj = t.neighbors[static_cast<std::size_t>(j)];
    std::set_intersection(ni.begin(), ni.end(), nj.begin(), nj.end(),
                          std::back_inserter(t.common[e]));
    for (int k : t.common[e]) t.common_edge[e].push_back(t.find_edge(i, k));
  }
  return t;
}

Substructure mutual_substructure(const GeometricGraph& graph, int i, int j) {
  const Topology topo = build_topology(graph);
  const int e = topo.find_edge(i, j);
  if (e < 0) throw NotAnEdge("mutual_substructure: (" + std::to_string(i) + ", " +
                             std::to_string(j) + ") is not an edge");
  Substructure s;
  s.center_edge = {i, j};
  s.member_nodes = {i, j};
  const auto& common = topo.common[static_cast<std::size_t>(e)];
  s.member_nodes.insert(s.member_nodes.end(), common.begin(), common.end());
  for (int k : s.member_nodes) {
    s.member_positions.push_back(graph.positions[static_cast<std::size_t>(k)]);
    if (static_cast<std::size_t>(k) < graph.node_features.size()) {
      s.member_features.push_back(graph.node_features[static_cast<std::size_t>(k)]);
    } else {
      s.member_features.emplace_back();
    }
  }
  std::vector<int> sorted = s.member_nodes;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [a, b] : graph.edges) {
    if (std::binary_search(sorted.begin(), sorted.end(), a) &&
        std::binary_search(sorted.begin(), sorted.end(), b)) {
      s.internal_edges.emplace_back(a, b);
    }
  }
  return s;
}

std::vector<double> rbf_embed(double d, const RbfConfig& cfg) {
  if (cfg.num_basis < 1 || !(cfg.cutoff > 0.0)) throw std::invalid_argument("rbf_embed: bad config");
  std::vector<double> out(static_cast<std::size_t>(cfg.num_basis));
  rbf_embed(d, cfg, out.data());
  return out;
}

}  // namespace leftnet
