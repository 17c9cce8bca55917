// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <string>

#include "leftnet/config.hpp"
#include "leftnet/datasets.hpp"
#include "leftnet/errors.hpp"
#include "leftnet/io.hpp"
#include "leftnet/probes.hpp"
#include "leftnet/suites.hpp"
#include "leftnet/train.hpp"

namespace leftnet::cli {
namespace {

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

int report(const std::vector<CheckResult>& checks, std::ostream& out, std::ostream& err) {
  out << format_checks(checks);
  for (const auto& c : checks) {
    if (!c.passed) {
      err << "first failing check: " << c.name << '\n';
      return kExitCheckFailed;
    }
  }
  return kExitPass;
}

// Model used by a check command: the config file's model when given.
ModelConfig model_for(const std::string& config_path) {
  if (config_path.empty()) return suite_model_config();
  return read_run_config_file(config_path).model;
}

int gen_data(const std::string& kind, int n, std::uint64_t seed, const std::string& path, std::ostream& out) {
  const auto frames = generate_dataset(kind, n, seed);
  if (path.empty()) {
    out << write_xyz(frames);
  } else {
    write_xyz_file(path, frames);
    out << "wrote " << frames.size() << " frames to " << path << '\n';
  }
  return kExitPass;
}

int fit(const std::string& data, const std::string& config_path, const std::string& ckpt, std::string metrics,
        std::ostream& out) {
  const RunConfig cfg = config_path.empty() ? RunConfig{} : read_run_config_file(config_path);
  auto frames = read_xyz_file(data);
  if (frames.empty()) throw ConfigError("no frames in " + data);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(frames.begin(), frames.end(), rng);
  auto val_count = static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(frames.size()));
  val_count = std::min(val_count, frames.size() - 1);
  const std::vector<XyzFrame> train_frames(frames.begin(), frames.end() - static_cast<std::ptrdiff_t>(val_count));
  const std::vector<XyzFrame> val_frames(frames.end() - static_cast<std::ptrdiff_t>(val_count), frames.end());
  const auto train_set = make_samples(train_frames, cfg.model.cutoff);
  const auto val_set = make_samples(val_frames, cfg.model.cutoff);

  if (metrics.empty()) metrics = ckpt + ".csv";
  std::ofstream csv(metrics);
  if (!csv) throw ConfigError("cannot write " + metrics);
  const std::string echo = to_json(cfg);
  write_metrics_header(csv, echo);
  out << "config: " << echo << '\n';
  out << "train frames: " << train_set.size() << ", validation frames: " << val_set.size() << '\n';

  const TrainResult result = train(train_set, val_set, init_params(cfg.model, cfg.seed), cfg.loss, cfg.train,
                                   [&](const EpochMetrics& m) { write_metrics_row(csv, m); });
  save_checkpoint(ckpt, result.best, &cfg);
  const EpochMetrics& best = result.history[static_cast<std::size_t>(result.best_epoch)];
  out << "best epoch " << result.best_epoch << ": val energy MAE " << best.val_energy_mae << ", val force MAE "
      << best.val_force_mae << '\n';
  out << "checkpoint: " << ckpt << "\nmetrics: " << metrics << '\n';
  return kExitPass;
}

int predict(const std::string& ckpt, const std::string& data, const std::string& path, std::ostream& out) {
  const ModelParams params = load_checkpoint(ckpt);
  auto frames = read_xyz_file(data);
  const std::string echo = "config=" + to_json(params.config);
  for (auto& f : frames) {
    const GeometricGraph graph = to_graph(f, params.config.cutoff);
    const EnergyForces ef = energy_and_forces(graph, params);
    f.energy = ef.energy;
    f.forces = ef.forces;
    f.comment = echo;
  }
  if (path.empty()) {
    out << write_xyz(frames);
  } else {
    write_xyz_file(path, frames);
  }
  return kExitPass;
}

int two_hop(std::uint64_t seed, int steps, std::ostream& out) {
  TwoHopConfig cfg;
  if (steps > 0) cfg.steps = steps;
  out << "config: " << to_json(cfg.model) << " steps=" << cfg.steps << " train=" << cfg.train_size
      << " test=" << cfg.test_size << '\n';
  const ProbeResult scalar = two_hop_probe(seed, ProbeModel::kScalarOnly, cfg);
  const ProbeResult equi = two_hop_probe(seed, ProbeModel::kEquivariant, cfg);
  const double var = equi.target_variance;
  const std::vector<CheckResult> checks = {
      {"scalar_only test loss / Var", scalar.test_mse / var, 0.5, scalar.test_mse >= 0.5 * var,
       "train " + fmt("%.4g", scalar.train_mse) + ", test " + fmt("%.4g", scalar.test_mse)},
      {"equivariant test loss / Var", equi.test_mse / var, 0.05, equi.test_mse <= 0.05 * var,
       "train " + fmt("%.4g", equi.train_mse) + ", test " + fmt("%.4g", equi.test_mse)},
  };
  out << "target variance " << var << ", floor 0.5*Var = " << 0.5 * var << ", ceiling 0.05*Var = " << 0.05 * var
      << '\n';
  return report(checks, out, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"leftnet: frame-based equivariant graph networks"};
  app.require_subcommand(1);

  std::string kind = "lj_dimer", data, config, ckpt, output, metrics;
  int count = 100, pairs = 100, random_pairs = 1000, motions = 20, steps = 0;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as multi-frame XYZ");
  gen->add_option("--kind", kind, "lj_dimer, morse_cluster or two_hop_probe")->required();
  gen->add_option("--n", count, "Number of frames")->required();
  gen->add_option("--seed", seed);
  gen->add_option("--out", output, "Output path (stdout when omitted)");

  auto* fit_cmd = app.add_subcommand("fit", "Train on an XYZ dataset; write a checkpoint and CSV metrics");
  fit_cmd->add_option("--data", data)->required();
  fit_cmd->add_option("--config", config, "Run config JSON (defaults when omitted)");
  fit_cmd->add_option("--out", ckpt, "Checkpoint path")->required();
  fit_cmd->add_option("--metrics", metrics, "CSV path (default <out>.csv)");

  auto* pred = app.add_subcommand("predict", "Energies and forces for every frame, as XYZ");
  pred->add_option("--ckpt", ckpt)->required();
  pred->add_option("--data", data)->required();
  pred->add_option("--out", output, "Output path (stdout when omitted)");

  auto* equi = app.add_subcommand("check-equivariance", "Invariance, equivariance and reflection checks");
  equi->add_option("--config", config, "Run config JSON (small suite model when omitted)");
  equi->add_option("--seeds", count, "Random molecules, one parameter seed each");
  equi->add_option("--motions", motions, "Rigid motions per molecule");
  equi->add_option("--seed", seed);

  auto* iso = app.add_subcommand("isomorphism-suite", "Isometry hierarchy and discrimination checks");
  iso->add_option("--pairs", pairs, "Pairs per separating kind");
  iso->add_option("--random-pairs", random_pairs, "Mixed pairs for the hierarchy implication");
  iso->add_option("--seed", seed);

  auto* grad = app.add_subcommand("gradcheck", "Tape forces against central differences");
  grad->add_option("--config", config, "Run config JSON (small suite model when omitted)");
  grad->add_option("--molecules", count);
  grad->add_option("--seed", seed);

  auto* probe = app.add_subcommand("two-hop-probe", "Scalar-only versus equivariant two-hop probe");
  probe->add_option("--seed", seed);
  probe->add_option("--steps", steps, "Training steps (default 2000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*gen) return gen_data(kind, count, seed, output, out);
    if (*fit_cmd) return fit(data, config, ckpt, metrics, out);
    if (*pred) return predict(ckpt, data, output, out);
    if (*equi) {
      EquivarianceSuiteConfig cfg;
      cfg.model = model_for(config);
      cfg.molecules = count;
      cfg.motions = motions;
      cfg.seed = seed;
      out << "config: " << to_json(cfg.model) << '\n';
      return report(run_equivariance_suite(cfg), out, err);
    }
    if (*iso) {
      IsomorphismSuiteConfig cfg;
      cfg.pairs = pairs;
      cfg.random_pairs = random_pairs;
      cfg.seed = seed;
      out << "distance-only: " << to_json(distance_only_config()) << '\n';
      out << "lse: " << to_json(lse_embedding_config()) << '\n';
      return report(run_isomorphism_suite(cfg), out, err);
    }
    if (*grad) {
      GradcheckConfig cfg;
      cfg.model = model_for(config);
      cfg.molecules = count;
      cfg.seed = seed;
      out << "config: " << to_json(cfg.model) << '\n';
      const auto checks = run_gradcheck(cfg);
      out << "max relative error " << checks.front().value << '\n';
      return report(checks, out, err);
    }
    if (*probe) return two_hop(seed, steps, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace leftnet::cli
