// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

// Short-budget versions of the probes; the full budgets run in the acceptance binary.

#include "leftnet/probes.hpp"

#include <gtest/gtest.h>

namespace leftnet {
namespace {

TwoHopConfig short_two_hop() {
  TwoHopConfig cfg;
  cfg.train_size = 64;
  cfg.test_size = 128;
  cfg.steps = 150;
  return cfg;
}

TEST(TwoHopProbe, ScalarOnlyStaysAboveFloor) {
  const ProbeResult r = two_hop_probe(1, ProbeModel::kScalarOnly, short_two_hop());
  EXPECT_GT(r.target_variance, 0.1);
  EXPECT_GE(r.test_mse, 0.5 * r.target_variance);
}

TEST(TwoHopProbe, EquivariantLearnsAndIsDeterministic) {
  const ProbeResult a = two_hop_probe(1, ProbeModel::kEquivariant, short_two_hop());
  const ProbeResult b = two_hop_probe(1, ProbeModel::kEquivariant, short_two_hop());
  EXPECT_EQ(a.test_mse, b.test_mse);
  EXPECT_EQ(a.train_mse, b.train_mse);
  EXPECT_LT(a.train_mse, 0.5 * a.target_variance);
}

TEST(NodeUpdateFit, ErrorFallsWithTraining) {
  UpdateFitConfig cfg;
  cfg.hidden_dim = 16;
  cfg.steps = 1;
  const ProbeResult start = fit_node_update(3, cfg);
  cfg.steps = 1000;
  const ProbeResult trained = fit_node_update(3, cfg);
  EXPECT_LT(trained.test_mse, 0.1 * start.test_mse);
  EXPECT_LT(trained.test_mse, 0.05 * trained.target_variance);
}

}  // namespace
}  // namespace leftnet
