// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Arguments select criteria by number (default: all).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "leftnet/datasets.hpp"
#include "leftnet/isomorphism.hpp"
#include "leftnet/model.hpp"
#include "leftnet/probes.hpp"
#include "leftnet/suites.hpp"
#include "leftnet/train.hpp"

namespace leftnet {
namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome from_checks(const std::vector<CheckResult>& checks) {
  Outcome o{all_passed(checks), ""};
  for (const auto& c : checks) {
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += fmt("%s %.3g (bound %.3g)%s", c.name.c_str(), c.value, c.bound, c.passed ? "" : " FAILED");
  }
  return o;
}

Frame random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    if (auto f = try_gram_schmidt(Vec3{u(rng), u(rng), u(rng)}, Vec3{u(rng), u(rng), u(rng)})) return *f;
  }
}

Frame rotate(const Mat3& r, const Frame& f) { return {r * f.e1, r * f.e2, r * f.e3}; }

// ---------------------------------------------------------------------------

Outcome equivariance() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CheckResult> checks = run_equivariance_suite({});
  std::erase_if(checks, [](const CheckResult& c) { return c.name.rfind("chirality", 0) == 0; });
  const double t = seconds_since(t0);
  Outcome o = from_checks(checks);
  o.passed = o.passed && t < 60.0;
  o.detail += fmt("; runtime %.1f s (bound 60 s)", t);
  return o;
}

Outcome reflection_dichotomy() {
  const XyzFrame probe = chiral_probe();
  const auto mirror = apply_motion(reflection({0.3, -0.5, 0.8}), probe.positions);
  ModelConfig se3 = suite_model_config();
  ModelConfig e3 = se3;
  e3.mode = ScalarMode::kE3;
  int distinct = 0;
  double e3_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto gap = [&](const ModelConfig& cfg) {
      const ModelParams p = init_params(cfg, seed);
      const double a = forward(build_radius_graph(probe.positions, cfg.cutoff, probe.atomic_numbers), p).graph_scalar;
      const double b = forward(build_radius_graph(mirror, cfg.cutoff, probe.atomic_numbers), p).graph_scalar;
      return std::abs(a - b);
    };
    distinct += gap(se3) > 1e-6;
    e3_worst = std::max(e3_worst, gap(e3));
  }
  return {distinct >= 90 && e3_worst <= 1e-9,
          fmt("SE3 distinguishes %d/100 seeds (bound 90); E3 max |delta| %.3g (bound 1e-9)", distinct, e3_worst)};
}

Outcome round_trips() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  double vec = 0.0, coeff = 0.0, rank2 = 0.0, rank2_coeff = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Frame f = random_frame(rng);
    const Vec3 v{g(rng), g(rng), g(rng)};
    vec = std::max(vec, max_abs_diff(tensorize(scalarize(v, f), f), v));
    const std::array<double, 3> c{g(rng), g(rng), g(rng)};
    const auto back = scalarize(tensorize(c, f), f);
    for (int k = 0; k < 3; ++k) coeff = std::max(coeff, std::abs(back[k] - c[k]));
    Mat3 m;
    for (auto& x : m.m) x = g(rng);
    rank2 = std::max(rank2, max_abs_diff(tensorize_rank2(scalarize_rank2(m, f), f), m));
    rank2_coeff = std::max(rank2_coeff, max_abs_diff(scalarize_rank2(tensorize_rank2(m, f), f), m));
  }
  return {vec <= 1e-12 && coeff <= 1e-12 && rank2 <= 1e-11 && rank2_coeff <= 1e-11,
          fmt("vector %.3g, coefficients %.3g (bound 1e-12); rank-2 %.3g / %.3g (bound 1e-11) over 10^4 cases", vec,
              coeff, rank2, rank2_coeff)};
}

// Textbook atan2 dihedral for the chain p0-p1-p2-p3.
double dihedral(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  const Vec3 b1 = p1 - p0, b2 = p2 - p1, b3 = p3 - p2;
  const Vec3 n1 = cross(b1, b2), n2 = cross(b2, b3);
  const Vec3 m1 = cross(n1, b2 * (1.0 / norm(b2)));
  return std::atan2(dot(m1, n2), dot(n1, n2));
}

Outcome frame_transitions() {
  std::mt19937_64 rng(4);
  double orth = 0.0, det = 0.0, invariance = 0.0, messages = 0.0, torsion = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Frame fi = random_frame(rng), fj = random_frame(rng);
    const Mat3 r = frame_transition(fi, fj);
    orth = std::max(orth, max_abs_diff(r.transposed() * r, Mat3::identity()));
    det = std::max(det, std::abs(r.determinant() - 1.0));
    const Mat3 q = random_rotation(rng()).rotation;
    invariance = std::max(invariance, max_abs_diff(frame_transition(rotate(q, fi), rotate(q, fj)), r));
    messages = std::max(messages, max_abs_diff(ft_from_messages(fi, fj), r));
  }
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int chains = 0;
  while (chains < 10000) {
    const Vec3 p0{u(rng), u(rng), u(rng)}, p1{u(rng), u(rng), u(rng)}, p2{u(rng), u(rng), u(rng)},
        p3{u(rng), u(rng), u(rng)};
    const auto fi = try_gram_schmidt(p2 - p1, p0 - p1);
    const auto fj = try_gram_schmidt(p2 - p1, p3 - p2);
    if (!fi || !fj) continue;
    ++chains;
    torsion = std::max(torsion, std::abs(torsion_from_transition(frame_transition(*fi, *fj)) -
                                         std::cos(dihedral(p0, p1, p2, p3))));
  }
  return {orth <= 1e-10 && det <= 1e-10 && invariance <= 1e-10 && messages <= 1e-12 && torsion <= 1e-9,
          fmt("orthogonality %.3g, det %.3g, rotation invariance %.3g (bound 1e-10); from messages %.3g (bound "
              "1e-12); torsion vs dihedral %.3g (bound 1e-9)",
              orth, det, invariance, messages, torsion)};
}

// The isomorphism suite runs once for criteria 5 and 6; `seconds` is its full runtime.
std::vector<CheckResult> isomorphism_checks(double* seconds = nullptr) {
  static double elapsed = 0.0;
  static const std::vector<CheckResult> checks = [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto c = run_isomorphism_suite({});
    elapsed = seconds_since(t0);
    return c;
  }();
  if (seconds) *seconds = elapsed;
  return checks;
}

Outcome hierarchy() {
  auto checks = isomorphism_checks();
  checks.resize(3);  // implication + both classifications
  return from_checks(checks);
}

Outcome discrimination() {
  double t = 0.0;
  auto checks = isomorphism_checks(&t);
  checks.erase(checks.begin(), checks.begin() + 3);
  Outcome o = from_checks(checks);
  o.passed = o.passed && t < 120.0;
  o.detail += fmt("; runtime %.1f s (bound 120 s)", t);
  return o;
}

Outcome two_hop() {
  const auto t0 = std::chrono::steady_clock::now();
  const ProbeResult scalar = two_hop_probe(0, ProbeModel::kScalarOnly);
  const ProbeResult equi = two_hop_probe(0, ProbeModel::kEquivariant);
  const double t = seconds_since(t0);
  const double var = equi.target_variance;
  return {scalar.test_mse >= 0.5 * var && equi.test_mse <= 0.05 * var && t < 300.0,
          fmt("scalar_only test MSE %.3f Var (bound >= 0.5), equivariant %.4f Var (bound <= 0.05), Var %.3f, "
              "2000 steps; runtime %.1f s (bound 300 s)",
              scalar.test_mse / var, equi.test_mse / var, var, t)};
}

Outcome node_update_fit() {
  const ProbeResult r = fit_node_update(0);
  return {r.test_mse <= 1e-3 * r.target_variance,
          fmt("held-out MSE %.3g Var (bound 1e-3) after %d steps", r.test_mse / r.target_variance,
              UpdateFitConfig{}.steps)};
}

Outcome gradients() { return from_checks(run_gradcheck({})); }

// Trains on half of a dataset, validates on the other half.
TrainResult fit_split(const std::vector<XyzFrame>& frames, const ModelConfig& model, const TrainConfig& cfg,
                      std::uint64_t seed, double* rms) {
  const auto samples = make_samples(frames, model.cutoff);
  const std::size_t half = samples.size() / 2;
  const std::vector<Sample> train_set(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<Sample> val_set(samples.begin() + static_cast<std::ptrdiff_t>(half), samples.end());
  if (rms) *rms = force_rms(samples);
  return train(train_set, val_set, init_params(model, seed), LossConfig{}, cfg);
}

Outcome learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig model;
  model.num_layers = 2;
  model.hidden_dim = 32;
  model.vector_channels = 4;
  model.cutoff = 3.0;
  model.num_rbf = 16;
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.batch_size = 16;
  cfg.schedule = {5e-3, 20, 0.5};
  double rms = 0.0;
  const TrainResult r = fit_split(lj_dimer_dataset(2000, 10), model, cfg, 0, &rms);
  const double t = seconds_since(t0);
  const double start = r.history.front().val_force_mae;
  const double best = r.history[static_cast<std::size_t>(r.best_epoch)].val_force_mae;
  return {start / best >= 5.0 && best <= 0.02 * rms && t < 900.0,
          fmt("LJ dimers 1000/1000: val force MAE %.4g -> %.4g (%.1fx, bound 5x); %.4f x force RMS %.3g (bound "
              "0.02); runtime %.0f s (bound 900 s)",
              start, best, start / best, best / rms, rms, t)};
}

Outcome scaling() {
  const ScalingReport r = measure_forward_scaling(suite_model_config(), {100, 200, 400, 800}, 0.05, 5, 1);
  std::string pts;
  for (const auto& p : r.points) pts += fmt(" n=%d (%d edges) %.4fs", p.atoms, p.edges, p.seconds);
  return {r.slope >= 0.9 && r.slope <= 1.15, fmt("slope %.3f (bound [0.9, 1.15]);%s", r.slope, pts.c_str())};
}

Outcome ablation() {
  const char* names[3] = {"no LSE/no FTE", "LSE only", "LSE + FTE"};
  double mean[3] = {0, 0, 0};
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto frames = morse_cluster_dataset(400, 20 + seed);
    for (int v = 0; v < 3; ++v) {
      ModelConfig model;
      model.num_layers = 2;
      model.hidden_dim = 32;
      model.vector_channels = 4;
      model.cutoff = 5.0;
      model.num_rbf = 16;
      model.use_lse = v >= 1;
      model.use_fte = v >= 2;
      TrainConfig cfg;
      cfg.epochs = 60;
      cfg.batch_size = 8;
      cfg.schedule = {3e-3, 20, 0.3};
      cfg.seed = seed;
      const TrainResult r = fit_split(frames, model, cfg, seed, nullptr);
      const double mae = r.history[static_cast<std::size_t>(r.best_epoch)].val_force_mae;
      mean[v] += mae / 3.0;
      per_seed += fmt(" %s[%d]=%.4f", names[v], static_cast<int>(seed), mae);
    }
  }
  const double gap1 = 1.0 - mean[1] / mean[0];
  const double gap2 = 1.0 - mean[2] / mean[1];
  return {gap1 >= 0.1 && gap2 >= 0.1,
          fmt("mean val force MAE %.4f > %.4f > %.4f; gaps %.1f%% and %.1f%% (bound 10%%);%s", mean[0], mean[1],
              mean[2], 100 * gap1, 100 * gap2, per_seed.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace leftnet

int main(int argc, char** argv) {
  using namespace leftnet;
  const std::vector<Criterion> criteria = {
      {1, "equivariance suite", equivariance},
      {2, "reflection dichotomy", reflection_dichotomy},
      {3, "scalarize/tensorize round trips", round_trips},
      {4, "frame transition", frame_transitions},
      {5, "isometry hierarchy", hierarchy},
      {6, "LSE discrimination", discrimination},
      {7, "two-hop probe", two_hop},
      {8, "node update fit", node_update_fit},
      {9, "gradient check", gradients},
      {10, "desk-scale learnability", learnability},
      {11, "forward scaling", scaling},
      {12, "ablation ordering", ablation},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("[%s] AC-%02d %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
