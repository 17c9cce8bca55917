// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/datasets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "leftnet/autodiff.hpp"
#include "leftnet/graph.hpp"
#include "test_support.hpp"

namespace leftnet {
namespace {

// Central differences of an energy function over every coordinate.
std::vector<Vec3> fd_forces(const std::function<double(const std::vector<Vec3>&)>& energy, std::vector<Vec3> x) {
  std::vector<Vec3> f(x.size());
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double keep = x[i][c];
      x[i][c] = keep + h;
      const double up = energy(x);
      x[i][c] = keep - h;
      const double down = energy(x);
      x[i][c] = keep;
      f[i][c] = -(up - down) / (2 * h);
    }
  }
  return f;
}

TEST(LennardJones, MinimumHasZeroForce) {
  const double r = std::pow(2.0, 1.0 / 6.0);
  std::vector<Vec3> f;
  const double e = lennard_jones({{0, 0, 0}, {r, 0, 0}}, {}, &f);
  EXPECT_NEAR(e, -1.0, 1e-12);
  EXPECT_LT(norm(f[0]), 1e-10);
  EXPECT_LT(norm(f[1]), 1e-10);
}

TEST(LennardJones, ForcesMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec3> x = {{0, 0, 0}, testing::random_vec(rng, 1.0) + Vec3{1.3, 0, 0},
                           testing::random_vec(rng, 1.0) + Vec3{0, 1.6, 0}};
    std::vector<Vec3> f;
    lennard_jones(x, {}, &f);
    const auto fd = fd_forces([](const std::vector<Vec3>& y) { return lennard_jones(y, {}, nullptr); }, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LT(max_abs_diff(f[i], fd[i]), 1e-8 * std::max(1.0, norm(f[i])));
    }
  }
}

TEST(Morse, ForcesMatchFiniteDifferences) {
  for (const auto& frame : morse_cluster_dataset(5, 2)) {
    const std::vector<std::vector<double>> r0(6, std::vector<double>(6, 1.2));
    std::vector<Vec3> f;
    morse(frame.positions, r0, {}, &f);
    const auto fd = fd_forces([&](const std::vector<Vec3>& y) { return morse(y, r0, {}, nullptr); }, frame.positions);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(max_abs_diff(f[i], fd[i]), 1e-8);
  }
}

TEST(Datasets, LabelsAreConsistent) {
  for (const auto& frame : lj_dimer_dataset(20, 3)) {
    std::vector<Vec3> f;
    EXPECT_NEAR(lennard_jones(frame.positions, {}, &f), *frame.energy, 1e-12);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(max_abs_diff(f[i], (*frame.forces)[i]), 1e-12);
  }
  for (const auto& frame : morse_cluster_dataset(10, 3)) {
    ASSERT_TRUE(frame.forces);
    Vec3 sum{};
    for (const Vec3& q : *frame.forces) sum += q;
    EXPECT_LT(norm(sum), 1e-10);
  }
}

TEST(Datasets, DeterministicPerSeed) {
  for (const char* kind : {"lj_dimer", "morse_cluster", "two_hop_probe"}) {
    const auto a = generate_dataset(kind, 5, 11);
    const auto b = generate_dataset(kind, 5, 11);
    const auto c = generate_dataset(kind, 5, 12);
    ASSERT_EQ(a.size(), 5u);
    EXPECT_EQ(a[4].positions[0].x, b[4].positions[0].x);
    EXPECT_NE(a[4].positions[0].x, c[4].positions[0].x);
  }
  EXPECT_THROW(generate_dataset("argon_gas", 1, 0), std::invalid_argument);
}

TEST(TwoHop, TreeGraphAndRotationInvariantTarget) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TwoHopSample s = two_hop_sample(seed);
    const auto g = build_radius_graph(s.frame.positions, kTwoHopCutoff);
    EXPECT_EQ(g.num_edges(), 12);
    EXPECT_NEAR(two_hop_target(s.frame.positions), s.target, 1e-12);
    RigidMotion m = random_rotation(seed + 100);
    EXPECT_NEAR(two_hop_target(apply_motion(m, s.frame.positions)), s.target, 1e-12);
  }
}

TEST(RandomCloud, FixedDensityRod) {
  const auto x = random_cloud(400, 0.05, 1);
  ASSERT_EQ(x.size(), 400u);
  double max_x = 0.0;
  for (const Vec3& p : x) {
    max_x = std::max(max_x, p.x);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LT(p.y, kCloudWidth);
  }
  EXPECT_LE(max_x, 400 / (0.05 * kCloudWidth * kCloudWidth));
  // Average degree stays flat as the rod grows.
  const double k1 = static_cast<double>(radius_edges(random_cloud(200, 0.05, 2), 4.0).size()) / 200;
  const double k2 = static_cast<double>(radius_edges(random_cloud(800, 0.05, 3), 4.0).size()) / 800;
  EXPECT_NEAR(k1 / k2, 1.0, 0.15);
}

TEST(ChiralProbe, MirrorIsNotSuperimposable) {
  const XyzFrame p = chiral_probe();
  ASSERT_GE(p.size(), 5u);
  const double v = signed_volume(p.positions[1], p.positions[2], p.positions[3], p.positions[4]);
  const auto m = apply_motion(reflection({1, 0, 0}), p.positions);
  EXPECT_LT(v * signed_volume(m[1], m[2], m[3], m[4]), 0.0);
}

}  // namespace
}  // namespace leftnet
