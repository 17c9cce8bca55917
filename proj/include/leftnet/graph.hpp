// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "leftnet/geometry.hpp"

namespace leftnet {

/// Directed edge (i, j): j sends to i. Both directions are always stored.
using Edge = std::pair<int, int>;

struct GeometricGraph {
  std::vector<Vec3> positions;
  std::vector<int> atomic_numbers;
  std::vector<std::vector<double>> node_features;
  std::vector<Edge> edges;
  double cutoff = 0.0;

  int num_nodes() const { return static_cast<int>(positions.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

/// Positions minus their mean, and the mean that was removed.
std::pair<std::vector<Vec3>, Vec3> centralize(std::span<const Vec3> positions);

/// All pairs with distance <= cutoff, both directions, sorted, no self-loops.
std::vector<Edge> radius_edges(std::span<const Vec3> positions, double cutoff);

/// Graph over `positions` with radius edges. Missing atomic numbers default
/// to 0; node features default to the atomic number as a 1-vector.
GeometricGraph build_radius_graph(std::span<const Vec3> positions, double cutoff,
                                  std::vector<int> atomic_numbers = {});

/// Same atoms moved by `g`, edges kept.
GeometricGraph transformed(const GeometricGraph& graph, const RigidMotion& g);

/// Adjacency lookups derived from a graph's edge list.
struct Topology {
  int num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> neighbors;   // sorted ascending
  std::vector<std::vector<int>> edge_ids;    // parallel to neighbors: id of (i, neighbors[i][k])
  std::vector<std::vector<int>> common;      // per edge: common neighbors of i and j, ascending
  std::vector<std::vector<int>> common_edge; // per edge: id of (i, k) for each common k

  /// Edge id of (i, j), or -1.
  int find_edge(int i, int j) const;
};

Topology build_topology(const GeometricGraph& graph);

struct Substructure {
  Edge center_edge{-1, -1};
  std::vector<int> member_nodes;  // i, j, then common neighbors ascending
  std::vector<Vec3> member_positions;
  std::vector<std::vector<double>> member_features;
  std::vector<Edge> internal_edges;
};

/// S_{i-j}: endpoints plus the common 1-hop neighbors, with every graph edge
/// inside the member set. Throws NotAnEdge.
Substructure mutual_substructure(const GeometricGraph& graph, int i, int j);

struct RbfConfig {
  int num_basis = 32;
  double cutoff = 6.0;
  double gamma = 0.0;  // 0 selects 10 / cutoff^2

  double effective_gamma() const { return gamma > 0.0 ? gamma : 10.0 / (cutoff * cutoff); }
  double center(int k) const {
    return num_basis == 1 ? 0.0 : cutoff * static_cast<double>(k) / (num_basis - 1);
  }
};

/// Smooth cosine envelope: 0.5 (cos(pi d / c) + 1) inside the cutoff, 0 outside.
template <class T>
T cosine_cutoff(const T& d, double cutoff) {
  using std::cos;
  if (value_of(d) >= cutoff) return T(0.0);
  return (cos(d * (std::numbers::pi / cutoff)) + 1.0) * 0.5;
}

/// Gaussian basis times cosine envelope, written into out[0 .. num_basis).
template <class T>
void rbf_embed(const T& d, const RbfConfig& cfg, T* out) {
  using std::exp;
  const T envelope = cosine_cutoff(d, cfg.cutoff);
  const double gamma = cfg.effective_gamma();
  for (int k = 0; k < cfg.num_basis; ++k) {
    if (value_of(envelope) == 0.0) {
      out[k] = T(0.0);
      continue;
    }
    const T diff = d - cfg.center(k);
    out[k] = exp(diff * diff * (-gamma)) * envelope;
  }
}

std::vector<double> rbf_embed(double d, const RbfConfig& cfg);

}  // namespace leftnet
