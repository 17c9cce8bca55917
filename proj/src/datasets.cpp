// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/datasets.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace leftnet {
namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = norm(v);
    if (n > 1e-6) return v / n;
  }
}

RigidMotion random_motion(std::mt19937_64& rng) {
  RigidMotion g = random_rotation(rng());
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  g.translation = {u(rng), u(rng), u(rng)};
  return g;
}

const std::vector<Vec3>& morse_reference() {
  static const std::vector<Vec3> ref = {
      {0.0, 0.0, 0.0},     {1.52, 0.0, 0.0},   {-0.62, 1.18, 0.15},
      {2.05, 0.95, 0.42},  {2.0, -0.66, -0.78}, {-0.48, -0.92, -0.55}};
  return ref;
}

const std::vector<int>& morse_elements() {
  static const std::vector<int> z = {6, 6, 8, 1, 1, 1};
  return z;
}

}  // namespace

XyzFrame random_molecule(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_molecule: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> bond(1.0, 1.6);
  const int elements[] = {1, 6, 7, 8};
  std::uniform_int_distribution<int> pick_element(0, 3);
  XyzFrame f;
  f.positions.push_back({0.0, 0.0, 0.0});
  while (static_cast<int>(f.positions.size()) < n) {
    std::uniform_int_distribution<std::size_t> pick(0, f.positions.size() - 1);
    const Vec3 candidate = f.positions[pick(rng)] + random_unit(rng) * bond(rng);
    bool ok = true;
    for (const auto& p : f.positions) ok = ok && norm(candidate - p) >= 0.9;
    if (ok) f.positions.push_back(candidate);
  }
  for (int a = 0; a < n; ++a) f.atomic_numbers.push_back(elements[pick_element(rng)]);
  f.comment = "random_molecule seed=" + std::to_string(seed);
  return f;
}

std::vector<Vec3> random_cloud(int n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double length = static_cast<double>(n) / (density * kCloudWidth * kCloudWidth);
  std::uniform_real_distribution<double> u(0.0, kCloudWidth);
  std::uniform_real_distribution<double> along(0.0, length);
  std::vector<Vec3> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++attempts > 1000 * n) throw GenerationFailed("random_cloud: density too high");
    const Vec3 c{along(rng), u(rng), u(rng)};
    bool ok = true;
    for (const auto& p : out) {
      if (squared_norm(c - p) < 0.64) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(c);
  }
  return out;
}

XyzFrame chiral_probe() {
  XyzFrame f;
  f.comment = "chiral probe";
  f.atomic_numbers = {6, 1, 9, 17, 35};
  f.positions = {{0.02, -0.03, 0.01},
                 {1.09, 0.0, 0.0},
                 {-0.45, 1.30, 0.05},
                 {-0.55, -0.80, 1.45},
                 {-0.60, -0.95, -1.60}};
  return f;
}

double lennard_jones(const std::vector<Vec3>& x, const LennardJones& p, std::vector<Vec3>* forces) {
  double e = 0.0;
  if (forces) forces->assign(x.size(), Vec3{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const Vec3 d = x[i] - x[j];
      const double r = norm(d);
      const double s6 = std::pow(p.sigma / r, 6);
      e += 4.0 * p.epsilon * (s6 * s6 - s6);
      if (forces) {
        // -dE/dr along the unit vector from j to i.
        const double f = 24.0 * p.epsilon * (2.0 * s6 * s6 - s6) / r;
        (*forces)[i] += d * (f / r);
        (*forces)[j] -= d * (f / r);
      }
    }
  }
  return e;
}

double morse(const std::vector<Vec3>& x, const std::vector<std::vector<double>>& r0, const Morse& p,
             std::vector<Vec3>* forces) {
  double e = 0.0;
  if (forces) forces->assign(x.size(), Vec3{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const Vec3 d = x[i] - x[j];
      const double r = norm(d);
      const double ex = std::exp(-p.width * (r - r0[i][j]));
      e += p.depth * (1.0 - ex) * (1.0 - ex) - p.depth;
      if (forces) {
        const double dedr = 2.0 * p.depth * p.width * (1.0 - ex) * ex;
        (*forces)[i] -= d * (dedr / r);
        (*forces)[j] += d * (dedr / r);
      }
    }
  }
  return e;
}

std::vector<XyzFrame> lj_dimer_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sep(0.95, 2.2);
  std::vector<XyzFrame> out;
  for (int s = 0; s < n; ++s) {
    const double r = sep(rng);
    const Vec3 axis = random_unit(rng);
    const RigidMotion g = random_motion(rng);
    XyzFrame f;
    f.atomic_numbers = {18, 18};
    f.positions = {g.apply(axis * (0.5 * r)), g.apply(axis * (-0.5 * r))};
    std::vector<Vec3> forces;
    f.energy = lennard_jones(f.positions, {}, &forces);
    f.forces = forces;
    f.comment = "lj_dimer";
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<XyzFrame> morse_cluster_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.1);
  const auto& ref = morse_reference();
  std::vector<std::vector<double>> r0(ref.size(), std::vector<double>(ref.size()));
  for (std::size_t i = 0; i < ref.size(); ++i)
    for (std::size_t j = 0; j < ref.size(); ++j) r0[i][j] = norm(ref[i] - ref[j]);
  std::vector<XyzFrame> out;
  for (int s = 0; s < n; ++s) {
    std::vector<Vec3> x = ref;
    for (auto& p : x) p += Vec3{jitter(rng), jitter(rng), jitter(rng)};
    std::vector<Vec3> forces;
    XyzFrame f;
    f.energy = morse(x, r0, {}, &forces);
    const RigidMotion g = random_motion(rng);
    f.positions = apply_motion(g, x);
    for (auto& q : forces) q = g.apply_linear(q);
    f.forces = forces;
    f.atomic_numbers = morse_elements();
    f.comment = "morse_cluster";
    out.push_back(std::move(f));
  }
  return out;
}

double two_hop_target(const std::vector<Vec3>& x) {
  if (x.size() != 7) throw std::invalid_argument("two_hop_target: expected 7 atoms");
  const Vec3 eb = x[3] - x[1];
  const Vec3 ec = x[5] - x[2];
  return dot(eb, ec) / (norm(eb) * norm(ec));
}

TwoHopSample two_hop_sample(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> bond(1.15, 1.3);
  const double cutoff = kTwoHopCutoff;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Vec3> x(7);
    x[0] = {0.0, 0.0, 0.0};
    x[1] = random_unit(rng) * 1.5;
    x[2] = random_unit(rng) * 1.5;
    x[3] = x[1] + random_unit(rng) * bond(rng);
    x[4] = x[1] + random_unit(rng) * bond(rng);
    x[5] = x[2] + random_unit(rng) * bond(rng);
    x[6] = x[2] + random_unit(rng) * bond(rng);
    // Bonds: a-b, a-c, b-B1, b-B2, c-C1, c-C2. Everything else must be
    // clearly outside the cutoff so the graph is exactly this tree.
    const int bonded[7][7] = {{0, 1, 1, 0, 0, 0, 0}, {1, 0, 0, 1, 1, 0, 0}, {1, 0, 0, 0, 0, 1, 1},
                              {0, 1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0, 0}, {0, 0, 1, 0, 0, 0, 0},
                              {0, 0, 1, 0, 0, 0, 0}};
    bool ok = true;
    for (int i = 0; i < 7 && ok; ++i) {
      for (int j = i + 1; j < 7 && ok; ++j) {
        const double r = norm(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
        ok = bonded[i][j] ? r < cutoff - 0.1 : r > cutoff + 0.1;
      }
    }
    if (!ok) continue;
    TwoHopSample s;
    s.target = two_hop_target(x);
    s.frame.atomic_numbers = {6, 6, 6, 8, 1, 8, 1};
    const RigidMotion g = random_motion(rng);
    s.frame.positions = apply_motion(g, x);
    s.frame.energy = s.target;
    s.frame.comment = "two_hop_probe";
    return s;
  }
  throw GenerationFailed("two_hop_sample: no admissible geometry");
}

std::vector<XyzFrame> two_hop_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<XyzFrame> out;
  for (int s = 0; s < n; ++s) out.push_back(two_hop_sample(rng()).frame);
  return out;
}

std::vector<XyzFrame> generate_dataset(const std::string& kind, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("generate_dataset: negative sample count");
  if (kind == "lj_dimer") return lj_dimer_dataset(n, seed);
  if (kind == "morse_cluster") return morse_cluster_dataset(n, seed);
  if (kind == "two_hop_probe") return two_hop_dataset(n, seed);
  throw std::invalid_argument("unknown dataset kind '" + kind + "'");
}

}  // namespace leftnet
