// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Check suites shared by the CLI and the acceptance runner. Each returns
// named checks with the measured value and the bound it was held to.

#include <cstdint>
#include <string>
#include <vector>

#include "leftnet/model.hpp"

namespace leftnet {

struct CheckResult {
  std::string name;
  double value = 0.0;  // measured error, rate or count
  double bound = 0.0;
  bool passed = false;
  std::string detail;
};

bool all_passed(const std::vector<CheckResult>& checks);
/// One aligned line per check.
std::string format_checks(const std::vector<CheckResult>& checks);

/// Small model used by the suites when no config is given: every feature on
/// (LSE, FTE, tensor channels) at a width that keeps the suites fast.
ModelConfig suite_model_config();

struct EquivarianceSuiteConfig {
  ModelConfig model = suite_model_config();
  int molecules = 100;
  int motions = 20;
  int min_atoms = 5;
  int max_atoms = 30;
  std::uint64_t seed = 0;
};

/// Invariance of energies, equivariance of vector/tensor channels and forces
/// under proper motions, zero net force, and the reflection behaviour of the
/// configured mode on the chiral probe (one parameter seed per molecule).
std::vector<CheckResult> run_equivariance_suite(const EquivarianceSuiteConfig& cfg);

struct IsomorphismSuiteConfig {
  int pairs = 100;          // per separating kind, and parameter seeds for discrimination
  int random_pairs = 1000;  // mixed pairs for the hierarchy implication
  std::uint64_t seed = 0;
};

/// Embedding models used for discrimination: pooled final h with LSE on or
/// off, frame-transition channels off.
ModelConfig distance_only_config();
ModelConfig lse_embedding_config();

std::vector<CheckResult> run_isomorphism_suite(const IsomorphismSuiteConfig& cfg);

struct GradcheckConfig {
  ModelConfig model = suite_model_config();
  int molecules = 100;
  int min_atoms = 3;
  int max_atoms = 8;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

/// Tape forces against central differences of the energy, plus zero net force.
std::vector<CheckResult> run_gradcheck(const GradcheckConfig& cfg);

struct ScalingPoint {
  int atoms = 0;
  int edges = 0;
  double seconds = 0.0;  // best of the repeats
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double slope = 0.0;  // least-squares slope of log(seconds) on log(atoms)
};

/// Forward wall-clock on random clouds at fixed density; graphs are built
/// before timing.
ScalingReport measure_forward_scaling(const ModelConfig& model, const std::vector<int>& sizes,
                                      double density, int repeats, std::uint64_t seed);

}  // namespace leftnet
