// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/train.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "leftnet/datasets.hpp"
#include "leftnet/errors.hpp"

namespace leftnet {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.num_layers = 1;
  c.hidden_dim = 6;
  c.vector_channels = 2;
  c.num_rbf = 4;
  c.cutoff = 3.0;
  return c;
}

Sample one_atom_sample(double energy, Vec3 force) {
  XyzFrame f;
  f.atomic_numbers = {1};
  f.positions = {{0, 0, 0}};
  f.energy = energy;
  f.forces = std::vector<Vec3>{force};
  return make_sample(f, 5.0);
}

TEST(Loss, HandComputed) {
  const Sample s = one_atom_sample(1.0, {0, 0, 0});
  const Sample* batch[] = {&s};
  const Prediction exact{1.0, {{0, 0, 0}}};
  EXPECT_EQ(loss(std::span(&exact, 1), batch, {}), 0.0);
  const Prediction off{3.0, {{1, 0, 0}}};
  EXPECT_NEAR(loss(std::span(&off, 1), batch, {100.0, 1.0}), 4.0 + 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(loss(std::span(&off, 1), batch, {0.0, 1.0}), 4.0, 1e-12);
}

TEST(Loss, MissingLabelsThrow) {
  XyzFrame f;
  f.atomic_numbers = {1};
  f.positions = {{0, 0, 0}};
  const Sample s = make_sample(f, 5.0);
  const Sample* batch[] = {&s};
  const Prediction p{0.0, {{0, 0, 0}}};
  EXPECT_THROW(loss(std::span(&p, 1), batch, {}), MissingLabels);
}

TEST(LossGradient, MatchesFiniteDifferences) {
  const auto frames = morse_cluster_dataset(2, 3);
  const auto samples = make_samples(frames, 3.0);
  const Sample* batch[] = {&samples[0], &samples[1]};
  ModelParams p = init_params(tiny_config(), 1);
  const LossConfig cfg{10.0, 1.0};
  std::vector<double> grad(p.values.size(), 0.0);
  loss_and_gradient(p, batch, cfg, &grad);
  std::vector<double> tape, fd;
  for (std::size_t k = 0; k < p.values.size(); k += 7) {
    const double keep = p.values[k];
    const double h = 1e-6;
    p.values[k] = keep + h;
    const double up = loss_and_gradient(p, batch, cfg, nullptr);
    p.values[k] = keep - h;
    const double down = loss_and_gradient(p, batch, cfg, nullptr);
    p.values[k] = keep;
    fd.push_back((up - down) / (2 * h));
    tape.push_back(grad[k]);
  }
  EXPECT_LT(ad::relative_error(tape, fd), 1e-6);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> x = {1.0, -2.0};
  AdamState s;
  const std::vector<double> g = {0.0, 0.0};
  for (int t = 0; t < 5; ++t) adam_step(x, g, s, 0.1);
  EXPECT_EQ(x, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, ConstantGradientStepsAtLearningRate) {
  std::vector<double> x = {0.0};
  AdamState s;
  const std::vector<double> g = {3.0};
  double prev = x[0];
  for (int t = 0; t < 100; ++t) {
    adam_step(x, g, s, 0.01);
    EXPECT_LT(x[0], prev);
    EXPECT_NEAR(prev - x[0], 0.01, 1e-6);
    prev = x[0];
  }
}

TEST(Adam, RejectsNonFiniteGradient) {
  std::vector<double> x = {0.0};
  AdamState s;
  const std::vector<double> g = {std::nan("")};
  EXPECT_THROW(adam_step(x, g, s, 0.01), NonFiniteGradient);
}

TEST(Schedule, HalvesAtEachDecay) {
  const StepDecay d{0.004, 10, 0.5};
  EXPECT_EQ(d.at(0), 0.004);
  EXPECT_EQ(d.at(9), 0.004);
  EXPECT_EQ(d.at(10), 0.002);
  EXPECT_EQ(d.at(25), 0.001);
}

TEST(Normalization, ShiftAndScale) {
  const auto samples = make_samples(lj_dimer_dataset(50, 1), 3.0);
  ModelConfig c = tiny_config();
  fit_normalization(c, samples);
  double mean = 0.0;
  for (const auto& s : samples) mean += *s.energy / 2.0;
  EXPECT_NEAR(c.energy_shift, mean / 50.0, 1e-12);
  EXPECT_NEAR(c.energy_scale, force_rms(samples), 1e-12);
}

TEST(Train, DeterministicAndImproving) {
  const auto data = make_samples(lj_dimer_dataset(60, 4), 3.0);
  const std::vector<Sample> tr(data.begin(), data.begin() + 40), va(data.begin() + 40, data.end());
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 8;
  cfg.schedule = {2e-2, 4, 0.5};
  cfg.seed = 2;
  const auto a = train(tr, va, init_params(tiny_config(), 0), {}, cfg);
  const auto b = train(tr, va, init_params(tiny_config(), 0), {}, cfg);
  ASSERT_EQ(a.history.size(), 9u);
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_EQ(a.history[e].val_force_mae, b.history[e].val_force_mae);
    EXPECT_EQ(a.history[e].lr, b.history[e].lr);
  }
  EXPECT_EQ(a.history[5].lr, 1e-2);
  EXPECT_LT(a.history[a.best_epoch].val_force_mae, a.history[0].val_force_mae);
  EXPECT_EQ(a.best.values, b.best.values);
}

}  // namespace
}  // namespace leftnet
