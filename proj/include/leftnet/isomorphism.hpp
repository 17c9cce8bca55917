// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reference oracles for the tree / triangular / subgraph isometry hierarchy
// of local neighborhoods, generators of pairs that separate the levels, and
// small identities showing how frame transitions can be read off messages.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leftnet/geometry.hpp"
#include "leftnet/graph.hpp"

namespace leftnet {

/// Alignment tolerance (RMSD, A) that defines "isometric".
inline constexpr double kIsometryTol = 1e-6;
/// Largest point set the brute-force matchers accept.
inline constexpr int kMaxMatchNodes = 8;

/// 1-hop neighborhood S_i. Local index 0 is the center; edges are all graph
/// edges among the members, as unordered pairs (a < b) of local indices.
struct LocalSubgraph {
  int center = 0;          // node id in the parent graph
  std::vector<int> nodes;  // parent node ids, center first, then neighbors ascending
  std::vector<Vec3> positions;
  std::vector<std::vector<double>> features;
  std::vector<Edge> edges;

  int size() const { return static_cast<int>(nodes.size()); }
  bool adjacent(int a, int b) const;
};

LocalSubgraph local_subgraph(const GeometricGraph& graph, int center);

enum class IsometryLevel { kTree, kTriangular, kSubgraph };

struct IsometryReport {
  IsometryLevel level = IsometryLevel::kTree;
  bool isometric = false;
  std::vector<int> bijection;        // local index in a -> local index in b
  std::vector<RigidMotion> motions;  // one for subgraph; one per neighbor for triangular
  double residual = 0.0;             // best alignment RMSD found (0 for tree)
};

struct KabschResult {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{};
  double rmsd = 0.0;
};

/// Proper rotation and translation minimizing sum |R x + t - y|^2.
KabschResult kabsch_se3(const std::vector<Vec3>& x, const std::vector<Vec3>& y);

IsometryReport tree_isometric(const LocalSubgraph& a, const LocalSubgraph& b);
/// Throws TooLarge when a mutual substructure exceeds kMaxMatchNodes.
IsometryReport triangular_isometric(const LocalSubgraph& a, const LocalSubgraph& b);
/// Throws TooLarge when a subgraph exceeds kMaxMatchNodes.
IsometryReport subgraph_isometric(const LocalSubgraph& a, const LocalSubgraph& b);

enum class PairKind { kTreeNotTriangular, kTriangularNotSubgraph };

struct GraphPair {
  GeometricGraph first;
  GeometricGraph second;
  int center = 0;  // node compared in both graphs
};

inline constexpr double kPairCutoff = 2.0;

/// Self-verified pair separating two levels of the hierarchy, compared at
/// node 0. Throws GenerationFailed after 100 rejected attempts.
GraphPair generate_pair(PairKind kind, std::uint64_t seed);

/// Mixed pairs for hierarchy checks: rigid copies, mirror images, perturbed
/// copies, unrelated molecules and both separating kinds.
GraphPair random_pair(std::uint64_t seed);

using Embedding = std::function<std::vector<double>(const GeometricGraph&)>;

/// True iff |embed(first) - embed(second)| > threshold (Euclidean).
bool discrimination_test(const Embedding& embed, const GraphPair& pair, double threshold);
double embedding_distance(const Embedding& embed, const GraphPair& pair);

/// (h_b . h_c, 0.5 (|h_b + h_c|^2 - |h_b|^2 - |h_c|^2)).
std::pair<double, double> fa_identity_check(const Vec3& h_b, const Vec3& h_c);

/// R[k][l] = 0.5 (|e_k^i + e_l^j|^2 - |e_k^i|^2 - |e_l^j|^2), from norms only.
Mat3 ft_from_messages(const Frame& f_i, const Frame& f_j);

std::string to_string(IsometryLevel level);

}  // namespace leftnet
