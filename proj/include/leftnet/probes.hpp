// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Small training experiments that certify expressiveness claims: the
// two-hop probe (local invariants cannot see the relative orientation of two
// clusters, frame-aware messages can) and the fit of a fixed equivariant map
// by a single node update.

#include <cstdint>

#include "leftnet/model.hpp"

namespace leftnet {

enum class ProbeModel { kScalarOnly, kEquivariant };

/// Model used by the equivariant probe.
ModelConfig two_hop_model_config();

struct TwoHopConfig {
  ModelConfig model = two_hop_model_config();
  int train_size = 512;
  int test_size = 512;
  int steps = 2000;  // full-batch Adam steps
};

struct ProbeResult {
  double train_mse = 0.0;
  double test_mse = 0.0;
  double target_variance = 0.0;  // over the test set
};

/// Scalar-only: an MLP on per-cluster invariants (all distances within
/// {a, b, B1, B2} and within {a, c, C1, C2}, plus |b - c|). Equivariant: a
/// two-layer frame-aware model read out at the central atom.
ProbeResult two_hop_probe(std::uint64_t seed, ProbeModel model, const TwoHopConfig& cfg = {});

struct UpdateFitConfig {
  int hidden_dim = 48;
  int batch_size = 128;  // fresh random inputs every step
  int steps = 10000;
  int test_size = 1000;
};

/// Trains one node update (vector channel in, vector channel out) to map
/// v -> (v . a) v + b x v, with a and b fixed in the node frame, on inputs
/// uniform in [-1, 1]^3 under random frames. Reports held-out MSE over all
/// components and the target variance.
ProbeResult fit_node_update(std::uint64_t seed, const UpdateFitConfig& cfg = {});

}  // namespace leftnet
