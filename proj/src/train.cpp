// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace leftnet {

Sample make_sample(const XyzFrame& frame, double cutoff) {
  Sample s;
  s.graph = to_graph(frame, cutoff);
  s.topo = build_topology(s.graph);
  s.energy = frame.energy;
  s.forces = frame.forces;
  return s;
}

std::vector<Sample> make_samples(const std::vector<XyzFrame>& frames, double cutoff) {
  std::vector<Sample> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(make_sample(f, cutoff));
  return out;
}

namespace {

std::size_t total_atoms(std::span<const Sample* const> batch) {
  std::size_t n = 0;
  for (const Sample* s : batch) n += s->graph.positions.size();
  return n;
}

void require_labels(const Sample& s, const LossConfig& cfg) {
  if (cfg.energy_weight != 0.0 && !s.energy) throw MissingLabels("sample has no energy label");
  if (cfg.wofe != 0.0 && !s.forces) throw MissingLabels("sample has no force labels");
  if (s.forces && s.forces->size() != s.graph.positions.size()) {
    throw MissingLabels("force label count does not match atom count");
  }
}

}  // namespace

double loss(std::span<const Prediction> predictions, std::span<const Sample* const> batch,
            const LossConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  if (predictions.size() != batch.size()) throw std::invalid_argument("loss: size mismatch");
  const double n_atoms = static_cast<double>(total_atoms(batch));
  double e_term = 0.0, f_term = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Sample& s = *batch[b];
    require_labels(s, cfg);
    if (cfg.energy_weight != 0.0) {
      const double de = predictions[b].energy - *s.energy;
      e_term += de * de;
    }
    if (cfg.wofe != 0.0) {
      for (std::size_t a = 0; a < s.forces->size(); ++a) {
        f_term += squared_norm(predictions[b].forces[a] - (*s.forces)[a]);
      }
    }
  }
  return cfg.energy_weight * e_term / static_cast<double>(batch.size()) +
         cfg.wofe * f_term / (3.0 * n_atoms);
}

Prediction predict(const ModelParams& params, const Sample& sample) {
  const EnergyForces ef = energy_and_forces(sample.graph, sample.topo, params);
  return {ef.energy, ef.forces};
}

double loss_and_gradient(const ModelParams& params, std::span<const Sample* const> batch,
                         const LossConfig& cfg, std::vector<double>* grad) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  std::vector<Prediction> preds;
  preds.reserve(batch.size());
  for (const Sample* s : batch) {
    require_labels(*s, cfg);
    preds.push_back(predict(params, *s));
  }
  const double value = loss(preds, batch, cfg);
  if (grad == nullptr) return value;
  grad->resize(params.values.size(), 0.0);

  using D = ad::Dual<ad::Var>;
  const double n_atoms = static_cast<double>(total_atoms(batch));
  const double force_coeff = -cfg.wofe * 2.0 / (3.0 * n_atoms);
  thread_local ad::Tape tape;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Sample& s = *batch[b];
    const double energy_coeff =
        cfg.energy_weight == 0.0
            ? 0.0
            : cfg.energy_weight * 2.0 * (preds[b].energy - *s.energy) / static_cast<double>(batch.size());
    tape.clear();
    ad::TapeScope scope(tape);
    // Parameters are the reverse-mode leaves; the forward tangent runs along
    // the force residual so that d(E.t)/dtheta = d(r . dE/dx)/dtheta.
    std::vector<D> theta;
    theta.reserve(params.values.size());
    for (double w : params.values) theta.emplace_back(tape.variable(w), ad::Var(0.0));
    std::vector<Vec3T<D>> pos;
    pos.reserve(s.graph.positions.size());
    for (std::size_t a = 0; a < s.graph.positions.size(); ++a) {
      const Vec3& x = s.graph.positions[a];
      Vec3 r{};
      if (cfg.wofe != 0.0) r = preds[b].forces[a] - (*s.forces)[a];
      pos.emplace_back(D(x.x, r.x), D(x.y, r.y), D(x.z, r.z));
    }
    const auto res = forward<D>(params.config, params.layout, theta, pos, s.graph.atomic_numbers, s.topo);
    const ad::Var root = res.energy.v * energy_coeff + res.energy.t * force_coeff;
    const std::vector<double> adj = tape.adjoints(root);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      (*grad)[k] += adj[static_cast<std::size_t>(theta[k].v.id)];
    }
  }
  return value;
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw std::invalid_argument("adam_step: size mismatch");
  for (double g : grads) {
    if (!std::isfinite(g)) throw NonFiniteGradient("adam_step: non-finite gradient");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grads[k];
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grads[k] * grads[k];
    const double mhat = state.m[k] / c1;
    const double vhat = state.v[k] / c2;
    params[k] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

double StepDecay::at(int epoch) const {
  if (decay_epochs <= 0) return initial;
  return initial * std::pow(factor, std::floor(static_cast<double>(epoch) / decay_epochs));
}

double force_rms(std::span<const Sample> samples) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (!s.forces) continue;
    for (const auto& f : *s.forces) {
      sum += squared_norm(f);
      count += 3;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

void fit_normalization(ModelConfig& config, std::span<const Sample> samples) {
  double per_atom = 0.0;
  std::size_t labelled = 0;
  for (const auto& s : samples) {
    if (!s.energy) continue;
    per_atom += *s.energy / static_cast<double>(s.graph.positions.size());
    ++labelled;
  }
  if (labelled == 0) return;
  config.energy_shift = per_atom / static_cast<double>(labelled);
  double scale = force_rms(samples);
  if (!(scale > 0.0)) {
    double var = 0.0;
    for (const auto& s : samples) {
      if (!s.energy) continue;
      const double r = *s.energy - config.energy_shift * static_cast<double>(s.graph.positions.size());
      var += r * r;
    }
    scale = std::sqrt(var / static_cast<double>(labelled));
  }
  config.energy_scale = scale > 0.0 ? scale : 1.0;
}

Errors evaluate(const ModelParams& params, std::span<const Sample> samples) {
  Errors e;
  std::size_t n_energy = 0, n_force = 0;
  for (const auto& s : samples) {
    const Prediction p = predict(params, s);
    if (s.energy) {
      e.energy_mae += std::abs(p.energy - *s.energy);
      ++n_energy;
    }
    if (s.forces) {
      for (std::size_t a = 0; a < p.forces.size(); ++a) {
        const Vec3 d = p.forces[a] - (*s.forces)[a];
        e.force_mae += std::abs(d.x) + std::abs(d.y) + std::abs(d.z);
        n_force += 3;
      }
    }
  }
  if (n_energy) e.energy_mae /= static_cast<double>(n_energy);
  if (n_force) e.force_mae /= static_cast<double>(n_force);
  return e;
}

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set,
                  ModelParams init, const LossConfig& loss_cfg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.normalize) fit_normalization(init.config, train_set);
  const bool has_forces = train_set.front().forces.has_value();

  TrainResult result;
  ModelParams params = std::move(init);
  auto record = [&](int epoch, double lr) {
    const Errors tr = evaluate(params, train_set);
    const Errors va = val_set.empty() ? tr : evaluate(params, val_set);
    EpochMetrics m{epoch, lr, tr.energy_mae, tr.force_mae, va.energy_mae, va.force_mae};
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
    const double score = has_forces ? m.val_force_mae : m.val_energy_mae;
    const auto& best = result.history[static_cast<std::size_t>(result.best_epoch)];
    const double best_score = has_forces ? best.val_force_mae : best.val_energy_mae;
    if (epoch == 0 || score < best_score) {
      result.best = params;
      result.best_epoch = epoch;
    }
  };
  record(0, cfg.schedule.at(0));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  AdamState adam;
  std::vector<double> grad;
  std::vector<const Sample*> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.schedule.at(epoch - 1);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&train_set[order[k]]);
      grad.assign(params.values.size(), 0.0);
      loss_and_gradient(params, batch, loss_cfg, &grad);
      adam_step(params.values, grad, adam, lr);
    }
    record(epoch, lr);
  }
  return result;
}

}  // namespace leftnet
