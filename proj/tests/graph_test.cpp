// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "leftnet/errors.hpp"
#include "test_support.hpp"

namespace leftnet {
namespace {

using testing::random_vec;

std::vector<Vec3> cloud(std::uint64_t seed, int n = 20, double scale = 3.0) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> x;
  for (int i = 0; i < n; ++i) x.push_back(random_vec(rng, scale));
  return x;
}

TEST(Centralize, Examples) {
  const std::vector<Vec3> pair = {{1, 0, 0}, {-1, 0, 0}};
  auto [c1, m1] = centralize(pair);
  EXPECT_EQ(max_abs_diff(c1[0], pair[0]), 0.0);
  EXPECT_EQ(norm(m1), 0.0);
  const std::vector<Vec3> one = {{2, 2, 2}};
  auto [c2, m2] = centralize(one);
  EXPECT_EQ(norm(c2[0]), 0.0);
  EXPECT_EQ(max_abs_diff(m2, {2, 2, 2}), 0.0);
  const auto x = cloud(1);
  Vec3 sum{};
  for (const Vec3& p : centralize(x).first) sum += p;
  EXPECT_LT(norm(sum) / x.size(), 1e-12);
}

TEST(RadiusGraph, BoundaryIsInclusive) {
  EXPECT_EQ(radius_edges(std::vector<Vec3>{{0, 0, 0}, {5, 0, 0}}, 5.0).size(), 2u);
  EXPECT_EQ(radius_edges(std::vector<Vec3>{{0, 0, 0}, {5.0001, 0, 0}}, 5.0).size(), 0u);
}

TEST(RadiusGraph, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = cloud(seed);
    std::vector<Edge> expected;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        if (i != j && norm(x[i] - x[j]) <= 2.5) expected.push_back({i, j});
    EXPECT_EQ(radius_edges(x, 2.5), expected);
  }
}

TEST(RadiusGraph, InvariantUnderMotion) {
  const auto x = cloud(3);
  RigidMotion g = random_rotation(4);
  g.translation = {7, -1, 2};
  const auto g1 = build_radius_graph(x, 2.5);
  // Distances change in the last bits under rotation; only compare away from the boundary.
  for (const auto& [i, j] : g1.edges) ASSERT_LT(norm(x[i] - x[j]), 2.5 - 1e-9);
  EXPECT_EQ(build_radius_graph(apply_motion(g, x), 2.5).edges, g1.edges);
  const auto moved = transformed(g1, g);
  EXPECT_EQ(moved.edges, g1.edges);
  EXPECT_LT(max_abs_diff(moved.positions[3], g.apply(x[3])), 1e-12);
}

TEST(RadiusGraph, FeaturesDefaultToAtomicNumber) {
  const auto g = build_radius_graph(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}}, 2.0, {6, 8});
  EXPECT_EQ(g.node_features[1], std::vector<double>{8.0});
  const auto h = build_radius_graph(std::vector<Vec3>{{0, 0, 0}}, 2.0);
  EXPECT_EQ(h.atomic_numbers, std::vector<int>{0});
}

TEST(Topology, NeighborsAndEdgeIds) {
  const auto g = build_radius_graph(cloud(5), 2.5);
  const Topology t = build_topology(g);
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges[e];
    EXPECT_EQ(t.find_edge(i, j), e);
    EXPECT_GE(t.find_edge(j, i), 0);
  }
  EXPECT_EQ(t.find_edge(0, 0), -1);
}

TEST(Substructure, TriangleAndPath) {
  const auto tri = build_radius_graph(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0.5, 0.8, 0}}, 1.2);
  EXPECT_EQ(mutual_substructure(tri, 0, 1).member_nodes, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(mutual_substructure(tri, 0, 1).internal_edges.size(), 6u);
  const auto path = build_radius_graph(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, 1.2);
  EXPECT_EQ(mutual_substructure(path, 0, 1).member_nodes, (std::vector<int>{0, 1}));
  EXPECT_THROW(mutual_substructure(path, 0, 2), NotAnEdge);
}

TEST(Substructure, MatchesSetIntersectionAndIsSymmetric) {
  const auto g = build_radius_graph(cloud(6), 2.5);
  const Topology t = build_topology(g);
  for (const auto& [i, j] : g.edges) {
    std::vector<int> common;
    std::set_intersection(t.neighbors[i].begin(), t.neighbors[i].end(), t.neighbors[j].begin(),
                          t.neighbors[j].end(), std::back_inserter(common));
    const auto s = mutual_substructure(g, i, j);
    std::vector<int> expected = {i, j};
    expected.insert(expected.end(), common.begin(), common.end());
    EXPECT_EQ(s.member_nodes, expected);
    EXPECT_EQ(t.common[t.find_edge(i, j)], common);
    auto a = s.member_nodes, b = mutual_substructure(g, j, i).member_nodes;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(Rbf, CutoffAndRange) {
  const RbfConfig cfg{16, 5.0, 0.0};
  for (double v : rbf_embed(5.0, cfg)) EXPECT_LE(std::abs(v), 1e-15);
  EXPECT_NEAR(rbf_embed(0.0, cfg)[0], 1.0, 1e-15);
  const auto below = rbf_embed(5.0 - 1e-9, cfg);
  for (double v : below) EXPECT_LT(std::abs(v), 1e-15);
  for (double v : rbf_embed(5.1, cfg)) EXPECT_EQ(v, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 6.0);
  for (int t = 0; t < 1000; ++t) {
    for (double v : rbf_embed(d(rng), cfg)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

}  // namespace
}  // namespace leftnet
