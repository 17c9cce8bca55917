// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Run configuration as JSON, the binary parameter checkpoint, and the CSV
// metric log. Every artifact carries the effective configuration.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "leftnet/model.hpp"
#include "leftnet/train.hpp"

namespace leftnet {

struct RunConfig {
  ModelConfig model;
  LossConfig loss;
  TrainConfig train;          // train.seed mirrors `seed`
  double val_fraction = 0.5;  // tail of the shuffled data held out for validation
  std::uint64_t seed = 0;
};

/// Parses a JSON run config. Missing keys keep their defaults; unknown keys,
/// wrong types and invalid values throw ConfigError.
RunConfig parse_run_config(std::string_view json);
RunConfig read_run_config_file(const std::string& path);

/// Compact JSON with every field present. Parsing it gives back the same config.
std::string to_json(const RunConfig& cfg);
std::string to_json(const ModelConfig& cfg);
ModelConfig parse_model_config(std::string_view json);

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCheckpointMagic = "LEFTNET1";

/// "LEFTNET1", u64 byte length of the config block, the config block (compact
/// JSON: {"model": ..., plus "run": the effective run config when given}),
/// the parameters as little-endian f64 in declaration order, and a trailing
/// u64 holding the parameter count.
std::string checkpoint_bytes(const ModelParams& params, const RunConfig* run = nullptr);
/// Throws CheckpointError on a wrong magic or version, a truncated file, a
/// count that disagrees with the layout, or a malformed config block.
ModelParams parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const ModelParams& params, const RunConfig* run = nullptr);
ModelParams load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Metric log
// ---------------------------------------------------------------------------

inline constexpr std::string_view kMetricsHeader =
    "epoch,lr,train_energy_mae,train_force_mae,val_energy_mae,val_force_mae";

/// "# config=<json>" then the column header.
void write_metrics_header(std::ostream& out, const std::string& config_json);
void write_metrics_row(std::ostream& out, const EpochMetrics& m);

}  // namespace leftnet
