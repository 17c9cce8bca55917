// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "leftnet/io.hpp"
#include "leftnet/model.hpp"

namespace leftnet {

struct LossConfig {
  double wofe = 100.0;  // force weight relative to energy
  double energy_weight = 1.0;
};

/// One labelled structure with its graph and topology prepared once.
struct Sample {
  GeometricGraph graph;
  Topology topo;
  std::optional<double> energy;
  std::optional<std::vector<Vec3>> forces;
};

Sample make_sample(const XyzFrame& frame, double cutoff);
std::vector<Sample> make_samples(const std::vector<XyzFrame>& frames, double cutoff);

struct Prediction {
  double energy = 0.0;
  std::vector<Vec3> forces;
};

/// energy_weight * mean (E - E*)^2 + wofe * mean over atoms and components (F - F*)^2.
/// Throws MissingLabels when a needed label is absent.
double loss(std::span<const Prediction> predictions, std::span<const Sample* const> batch,
            const LossConfig& cfg);

/// Loss of the model on a batch and, if `grad` is non-null, its exact
/// gradient with respect to every parameter (accumulated into `grad`).
double loss_and_gradient(const ModelParams& params, std::span<const Sample* const> batch,
                         const LossConfig& cfg, std::vector<double>* grad);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update in place. Throws NonFiniteGradient.
void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& cfg = {});

/// lr(epoch) = initial * factor^floor(epoch / decay_epochs).
struct StepDecay {
  double initial = 5e-4;
  int decay_epochs = 100;
  double factor = 0.5;

  double at(int epoch) const;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 4;
  StepDecay schedule;
  std::uint64_t seed = 0;
  /// Set energy_shift to the mean per-atom energy and energy_scale to the
  /// force RMS (energy std without forces) before training.
  bool normalize = true;
};

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double train_energy_mae = 0.0;
  double train_force_mae = 0.0;
  double val_energy_mae = 0.0;
  double val_force_mae = 0.0;
};

struct TrainResult {
  ModelParams best;
  int best_epoch = 0;
  std::vector<EpochMetrics> history;  // entry 0 is the initialization
};

struct Errors {
  double energy_mae = 0.0;
  double force_mae = 0.0;  // mean over atoms and components
};

Prediction predict(const ModelParams& params, const Sample& sample);
Errors evaluate(const ModelParams& params, std::span<const Sample> samples);

/// Sets energy_shift / energy_scale from the training labels.
void fit_normalization(ModelConfig& config, std::span<const Sample> samples);

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Shuffled minibatch Adam with step decay; keeps the parameters with the
/// lowest validation force MAE (energy MAE when forces are unlabelled).
TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set,
                  ModelParams init, const LossConfig& loss_cfg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Force RMS over all atoms and components of a dataset.
double force_rms(std::span<const Sample> samples);

}  // namespace leftnet
