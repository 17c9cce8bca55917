// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/isomorphism.hpp"

#include <gtest/gtest.h>

#include <random>

#include "leftnet/datasets.hpp"
#include "leftnet/errors.hpp"
#include "leftnet/model.hpp"
#include "leftnet/suites.hpp"
#include "test_support.hpp"

namespace leftnet {
namespace {

using testing::random_frame;
using testing::random_vec;

struct Levels {
  bool tree, tri, sub;
};

Levels classify(const GraphPair& p) {
  const auto a = local_subgraph(p.first, p.center);
  const auto b = local_subgraph(p.second, p.center);
  return {tree_isometric(a, b).isometric, triangular_isometric(a, b).isometric, subgraph_isometric(a, b).isometric};
}

std::vector<Vec3> chiral_points() {
  return {{0, 0, 0}, {1.1, 0, 0}, {0, 1.3, 0}, {0, 0, 1.7}};
}

TEST(Kabsch, IdenticalSets) {
  const auto x = chiral_points();
  const auto k = kabsch_se3(x, x);
  EXPECT_LT(max_abs_diff(k.rotation, Mat3::identity()), 1e-12);
  EXPECT_LT(norm(k.translation), 1e-12);
  EXPECT_LT(k.rmsd, 1e-12);
}

TEST(Kabsch, RecoversRigidMotion) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec3> x;
    for (int i = 0; i < 6; ++i) x.push_back(random_vec(rng, 2.0));
    RigidMotion g = random_rotation(rng());
    g.translation = random_vec(rng, 5.0);
    const auto y = apply_motion(g, x);
    const auto k = kabsch_se3(x, y);
    EXPECT_LT(k.rmsd, 1e-10);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(max_abs_diff(k.rotation * x[i] + k.translation, y[i]), 1e-10);
  }
}

TEST(Kabsch, MirrorImageCannotBeAligned) {
  const auto x = chiral_points();
  const auto y = apply_motion(reflection({0, 0, 1}), x);
  ASSERT_LT(signed_volume(x[0], x[1], x[2], x[3]) * signed_volume(y[0], y[1], y[2], y[3]), 0.0);
  EXPECT_GT(kabsch_se3(x, y).rmsd, 0.1);
}

TEST(LocalSubgraph, OrderingAndEdges) {
  const std::vector<Vec3> x = {{0, 0, 0}, {5, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto g = build_radius_graph(x, 1.5);
  const auto s = local_subgraph(g, 0);
  EXPECT_EQ(s.nodes, (std::vector<int>{0, 2, 3}));
  EXPECT_TRUE(s.adjacent(0, 1));
  EXPECT_TRUE(s.adjacent(1, 2));  // |(1,0,0)-(0,1,0)| = 1.41
  EXPECT_EQ(s.edges.size(), 3u);
}

TEST(Oracles, SelfPairIsIsometricAtEveryLevel) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto mol = random_molecule(6, seed);
    const auto g = build_radius_graph(mol.positions, kPairCutoff, mol.atomic_numbers);
    const auto s = local_subgraph(g, 0);
    EXPECT_TRUE(tree_isometric(s, s).isometric);
    EXPECT_TRUE(triangular_isometric(s, s).isometric);
    EXPECT_TRUE(subgraph_isometric(s, s).isometric);
  }
}

TEST(Oracles, PerturbedEdgeLengthBreaksTree) {
  const auto mol = random_molecule(5, 11);
  const auto g = build_radius_graph(mol.positions, kPairCutoff, mol.atomic_numbers);
  const auto s = local_subgraph(g, 0);
  ASSERT_GE(s.size(), 2);
  GeometricGraph h = g;
  const int j = s.nodes[1];
  const Vec3 dir = (h.positions[j] - h.positions[0]) * (1.0 / norm(h.positions[j] - h.positions[0]));
  h.positions[j] += dir * 0.1;
  const auto t = local_subgraph(h, 0);
  EXPECT_FALSE(tree_isometric(s, t).isometric);
  EXPECT_FALSE(subgraph_isometric(s, t).isometric);
}

TEST(Oracles, RotatedCopyIsSubgraphIsometric) {
  const auto mol = random_molecule(7, 5);
  const auto g = build_radius_graph(mol.positions, kPairCutoff, mol.atomic_numbers);
  RigidMotion m = random_rotation(9);
  m.translation = {1, -2, 3};
  const auto r = subgraph_isometric(local_subgraph(g, 0), local_subgraph(transformed(g, m), 0));
  EXPECT_TRUE(r.isometric);
  ASSERT_EQ(r.motions.size(), 1u);
  EXPECT_LT(max_abs_diff(r.motions[0].rotation, m.rotation), 1e-8);
}

TEST(Oracles, TooLargeNeighborhoodThrows) {
  std::vector<Vec3> x = {{0, 0, 0}};
  std::mt19937_64 rng(1);
  for (int i = 0; i < 9; ++i) x.push_back(random_vec(rng, 0.6) + Vec3{0.05 * i, 0, 0});
  const auto g = build_radius_graph(x, 10.0);
  const auto s = local_subgraph(g, 0);
  EXPECT_THROW(subgraph_isometric(s, s), TooLarge);
}

TEST(Pairs, TreeNotTriangular) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Levels l = classify(generate_pair(PairKind::kTreeNotTriangular, seed));
    EXPECT_TRUE(l.tree);
    EXPECT_FALSE(l.tri);
    EXPECT_FALSE(l.sub);
  }
}

TEST(Pairs, TriangularNotSubgraph) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Levels l = classify(generate_pair(PairKind::kTriangularNotSubgraph, seed));
    EXPECT_TRUE(l.tree);
    EXPECT_TRUE(l.tri);
    EXPECT_FALSE(l.sub);
  }
}

TEST(Pairs, Deterministic) {
  const auto a = generate_pair(PairKind::kTreeNotTriangular, 42);
  const auto b = generate_pair(PairKind::kTreeNotTriangular, 42);
  ASSERT_EQ(a.first.positions.size(), b.first.positions.size());
  for (std::size_t i = 0; i < a.first.positions.size(); ++i) {
    EXPECT_EQ(max_abs_diff(a.first.positions[i], b.first.positions[i]), 0.0);
    EXPECT_EQ(max_abs_diff(a.second.positions[i], b.second.positions[i]), 0.0);
  }
}

TEST(Pairs, HierarchyHoldsOnMixedPairs) {
  int counts[3] = {0, 0, 0};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Levels l = classify(random_pair(seed));
    if (l.sub) EXPECT_TRUE(l.tri) << "seed " << seed;
    if (l.tri) EXPECT_TRUE(l.tree) << "seed " << seed;
    counts[0] += l.tree;
    counts[1] += l.tri;
    counts[2] += l.sub;
  }
  // The mix exercises every level and their separations.
  EXPECT_GT(counts[0], counts[1]);
  EXPECT_GT(counts[1], counts[2]);
  EXPECT_GT(counts[2], 0);
}

TEST(Pairs, OraclesIgnoreIndependentMotions) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    GraphPair p = random_pair(seed);
    const Levels before = classify(p);
    RigidMotion g1 = random_rotation(rng()), g2 = random_rotation(rng());
    g1.translation = random_vec(rng, 3.0);
    if (seed % 2) g2 = reflection({0, 1, 0}).compose(g2);  // mirrors too: tree and triangular are E(3) notions
    p.first = transformed(p.first, g1);
    if (seed % 2 == 0) p.second = transformed(p.second, g2);
    const Levels after = classify(p);
    EXPECT_EQ(before.tree, after.tree) << seed;
    EXPECT_EQ(before.tri, after.tri) << seed;
    EXPECT_EQ(before.sub, after.sub) << seed;
  }
}

TEST(Discrimination, ConstantEmbeddingNeverSeparates) {
  const Embedding constant = [](const GeometricGraph&) { return std::vector<double>{1.0, 2.0}; };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_FALSE(discrimination_test(constant, generate_pair(PairKind::kTreeNotTriangular, seed), 0.0));
  }
}

TEST(Discrimination, DistanceOnlyVersusLse) {
  int lse_hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GraphPair p = generate_pair(PairKind::kTreeNotTriangular, seed);
    const ModelParams plain = init_params(distance_only_config(), seed);
    const ModelParams lse = init_params(lse_embedding_config(), seed);
    EXPECT_LT(embedding_distance([&](const GeometricGraph& g) { return forward(g, plain).pooled; }, p), 1e-8);
    lse_hits += discrimination_test([&](const GeometricGraph& g) { return forward(g, lse).pooled; }, p, 1e-6);
  }
  EXPECT_GE(lse_hits, 9);
}

TEST(Identities, PolarizationExamples) {
  auto [l1, r1] = fa_identity_check({1, 0, 0}, {0, 1, 0});
  EXPECT_EQ(l1, 0.0);
  EXPECT_EQ(r1, 0.0);
  auto [l2, r2] = fa_identity_check({1, 0, 0}, {1, 0, 0});
  EXPECT_EQ(l2, 1.0);
  EXPECT_EQ(r2, 1.0);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 1000; ++t) {
    auto [l, r] = fa_identity_check(random_vec(rng), random_vec(rng));
    EXPECT_NEAR(l, r, 1e-12);
  }
}

TEST(Identities, TransitionFromMessages) {
  std::mt19937_64 rng(4);
  const Frame f = random_frame(rng);
  EXPECT_LT(max_abs_diff(ft_from_messages(f, f), Mat3::identity()), 1e-12);
  for (int t = 0; t < 200; ++t) {
    const Frame a = random_frame(rng), b = random_frame(rng);
    const Mat3 r = ft_from_messages(a, b);
    EXPECT_LT(max_abs_diff(r, frame_transition(a, b)), 1e-12);
    const Mat3 q = random_rotation(rng()).rotation;
    const Frame qa{q * a[0], q * a[1], q * a[2]};
    const Frame qb{q * b[0], q * b[1], q * b[2]};
    EXPECT_LT(max_abs_diff(ft_from_messages(qa, qb), r), 1e-12);
  }
}

}  // namespace
}  // namespace leftnet
