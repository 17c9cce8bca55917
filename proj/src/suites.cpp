// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "leftnet/datasets.hpp"
#include "leftnet/isomorphism.hpp"

namespace leftnet {
namespace {

CheckResult at_most(std::string name, double value, double bound, std::string detail = {}) {
  return {std::move(name), value, bound, value <= bound, std::move(detail)};
}

CheckResult at_least(std::string name, double value, double bound, std::string detail = {}) {
  return {std::move(name), value, bound, value >= bound, std::move(detail)};
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

RigidMotion random_proper_motion(std::mt19937_64& rng) {
  RigidMotion g = random_rotation(rng());
  std::normal_distribution<double> n(0.0, 5.0);
  g.translation = Vec3{n(rng), n(rng), n(rng)};
  return g;
}

ForwardResult<double> run(const ModelParams& p, const std::vector<Vec3>& x, const std::vector<int>& z,
                          const Topology& topo) {
  return forward<double>(p.config, p.layout, p.values, x, z, topo);
}

double energy_of(const ModelParams& p, const std::vector<Vec3>& x, const std::vector<int>& z,
                 const Topology& topo) {
  return run(p, x, z, topo).energy;
}

}  // namespace

bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string format_checks(const std::vector<CheckResult>& checks) {
  std::string out;
  for (const auto& c : checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-4s %-34s value=%-12.4g bound=%-10.4g %s\n", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.value, c.bound, c.detail.c_str());
    out += buf;
  }
  return out;
}

ModelConfig suite_model_config() {
  ModelConfig c;
  c.num_layers = 2;
  c.hidden_dim = 16;
  c.vector_channels = 4;
  c.use_tensor_channels = true;
  c.cutoff = 4.0;
  c.num_rbf = 12;
  return c;
}

// ---------------------------------------------------------------------------
// Equivariance
// ---------------------------------------------------------------------------

std::vector<CheckResult> run_equivariance_suite(const EquivarianceSuiteConfig& cfg) {
  cfg.model.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> size(cfg.min_atoms, cfg.max_atoms);
  double energy_err = 0.0, vector_err = 0.0, tensor_err = 0.0, force_err = 0.0, net_force = 0.0;
  double reflection_err = 0.0;
  int chiral_distinct = 0;
  double chiral_min_gap = std::numeric_limits<double>::infinity();
  int degenerate = 0;

  const XyzFrame probe = chiral_probe();
  const RigidMotion mirror = reflection(Vec3{0.0, 0.0, 1.0});
  const GeometricGraph probe_graph = build_radius_graph(probe.positions, cfg.model.cutoff, probe.atomic_numbers);
  const GeometricGraph mirror_graph = transformed(probe_graph, mirror);
  const Topology probe_topo = build_topology(probe_graph);

  for (int m = 0; m < cfg.molecules; ++m) {
    const XyzFrame mol = random_molecule(size(rng), rng());
    const ModelParams params = init_params(cfg.model, cfg.seed * 1000003ULL + static_cast<std::uint64_t>(m));
    const GeometricGraph graph = build_radius_graph(mol.positions, cfg.model.cutoff, mol.atomic_numbers);
    const Topology topo = build_topology(graph);
    const auto base = run(params, graph.positions, graph.atomic_numbers, topo);
    const EnergyForces base_f = energy_and_forces(graph, topo, params);
    degenerate += base.degenerate_nodes + base.degenerate_edges;
    Vec3 sum{};
    for (const Vec3& f : base_f.forces) sum += f;
    net_force = std::max(net_force, norm(sum));

    for (int k = 0; k < cfg.motions; ++k) {
      const RigidMotion g = random_proper_motion(rng);
      const GeometricGraph moved = transformed(graph, g);
      const auto out = run(params, moved.positions, moved.atomic_numbers, topo);
      energy_err = std::max(energy_err, std::abs(out.energy - base.energy));
      const Mat3& r = g.rotation;
      for (std::size_t i = 0; i < out.v.size(); ++i) {
        for (std::size_t ch = 0; ch < out.v[i].size(); ++ch) {
          vector_err = std::max(vector_err, max_abs_diff(out.v[i][ch], r * base.v[i][ch]));
        }
        for (std::size_t ch = 0; ch < out.tensors[i].size(); ++ch) {
          tensor_err = std::max(tensor_err,
                                max_abs_diff(out.tensors[i][ch], r * base.tensors[i][ch] * r.transposed()));
        }
      }
      const EnergyForces moved_f = energy_and_forces(moved, topo, params);
      Vec3 moved_sum{};
      for (std::size_t i = 0; i < moved_f.forces.size(); ++i) {
        force_err = std::max(force_err, max_abs_diff(moved_f.forces[i], r * base_f.forces[i]));
        moved_sum += moved_f.forces[i];
      }
      net_force = std::max(net_force, norm(moved_sum));
    }

    const double probe_gap = std::abs(energy_of(params, probe_graph.positions, probe_graph.atomic_numbers, probe_topo) -
                                      energy_of(params, mirror_graph.positions, mirror_graph.atomic_numbers, probe_topo));
    if (cfg.model.mode == ScalarMode::kSE3) {
      chiral_distinct += probe_gap > 1e-6;
      chiral_min_gap = std::min(chiral_min_gap, probe_gap);
    } else {
      const RigidMotion improper = mirror.compose(random_proper_motion(rng));
      const GeometricGraph reflected = transformed(graph, improper);
      const double e = energy_of(params, reflected.positions, reflected.atomic_numbers, topo);
      reflection_err = std::max({reflection_err, probe_gap, std::abs(e - base.energy)});
    }
  }

  std::vector<CheckResult> checks;
  const std::string frames = "degenerate frames seen: " + std::to_string(degenerate);
  checks.push_back(at_most("energy invariance", energy_err, 1e-9));
  if (cfg.model.fte_channels() > 0) checks.push_back(at_most("vector equivariance", vector_err, 1e-9, frames));
  if (cfg.model.tensor_channels() > 0) checks.push_back(at_most("tensor equivariance", tensor_err, 1e-9));
  checks.push_back(at_most("force equivariance", force_err, 1e-8));
  checks.push_back(at_most("net force", net_force, 1e-8));
  if (cfg.model.mode == ScalarMode::kSE3) {
    checks.push_back(at_least("chirality sensitivity (SE3)",
                              static_cast<double>(chiral_distinct) / std::max(1, cfg.molecules), 0.9,
                              fmt("smallest gap %.3g", chiral_min_gap)));
  } else {
    checks.push_back(at_most("reflection invariance (E3)", reflection_err, 1e-9));
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Isomorphism hierarchy and discrimination
// ---------------------------------------------------------------------------

ModelConfig distance_only_config() {
  ModelConfig c = lse_embedding_config();
  c.use_lse = false;
  return c;
}

ModelConfig lse_embedding_config() {
  ModelConfig c;
  c.num_layers = 2;
  c.hidden_dim = 16;
  c.cutoff = kPairCutoff;
  c.num_rbf = 16;
  c.use_lse = true;
  c.use_fte = false;
  return c;
}

std::vector<CheckResult> run_isomorphism_suite(const IsomorphismSuiteConfig& cfg) {
  int violations = 0;
  int counts[3] = {0, 0, 0};
  for (int s = 0; s < cfg.random_pairs; ++s) {
    const GraphPair p = random_pair(cfg.seed * 7919ULL + static_cast<std::uint64_t>(s));
    const auto a = local_subgraph(p.first, p.center);
    const auto b = local_subgraph(p.second, p.center);
    const bool tree = tree_isometric(a, b).isometric;
    const bool tri = triangular_isometric(a, b).isometric;
    const bool sub = subgraph_isometric(a, b).isometric;
    violations += (sub && !tri) || (tri && !tree);
    counts[0] += tree;
    counts[1] += tri;
    counts[2] += sub;
  }

  int tnt_ok = 0, tns_ok = 0, lse_hits = 0, distance_hits = 0;
  double distance_max = 0.0, lse_min = std::numeric_limits<double>::infinity();
  for (int s = 0; s < cfg.pairs; ++s) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    const GraphPair tnt = generate_pair(PairKind::kTreeNotTriangular, seed);
    {
      const auto a = local_subgraph(tnt.first, 0);
      const auto b = local_subgraph(tnt.second, 0);
      tnt_ok += tree_isometric(a, b).isometric && !triangular_isometric(a, b).isometric &&
                !subgraph_isometric(a, b).isometric;
    }
    const GraphPair tns = generate_pair(PairKind::kTriangularNotSubgraph, seed);
    {
      const auto a = local_subgraph(tns.first, 0);
      const auto b = local_subgraph(tns.second, 0);
      tns_ok += tree_isometric(a, b).isometric && triangular_isometric(a, b).isometric &&
                !subgraph_isometric(a, b).isometric;
    }
    const ModelParams plain = init_params(distance_only_config(), seed);
    const ModelParams lse = init_params(lse_embedding_config(), seed);
    const Embedding plain_embed = [&](const GeometricGraph& g) { return forward(g, plain).pooled; };
    const Embedding lse_embed = [&](const GeometricGraph& g) { return forward(g, lse).pooled; };
    const double dp = embedding_distance(plain_embed, tnt);
    const double dl = embedding_distance(lse_embed, tnt);
    distance_max = std::max(distance_max, dp);
    lse_min = std::min(lse_min, dl);
    distance_hits += dp > 1e-6;
    lse_hits += dl > 1e-6;
  }

  const double n = std::max(1, cfg.pairs);
  std::vector<CheckResult> checks;
  checks.push_back(at_most("hierarchy implication violations", violations, 0.0,
                           "over " + std::to_string(cfg.random_pairs) + " pairs; tree/tri/sub true: " +
                               std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                               std::to_string(counts[2])));
  checks.push_back(at_least("tree_not_triangular classified", tnt_ok / n, 1.0));
  checks.push_back(at_least("triangular_not_subgraph classified", tns_ok / n, 1.0));
  checks.push_back(at_most("distance-only embedding gap", distance_max, 1e-8,
                           "discriminated " + std::to_string(distance_hits) + "/" + std::to_string(cfg.pairs)));
  checks.push_back(at_least("LSE discrimination rate", lse_hits / n, 0.95, fmt("smallest gap %.3g", lse_min)));
  return checks;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

std::vector<CheckResult> run_gradcheck(const GradcheckConfig& cfg) {
  cfg.model.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> size(cfg.min_atoms, cfg.max_atoms);
  double worst = 0.0, net = 0.0;
  for (int m = 0; m < cfg.molecules; ++m) {
    const XyzFrame mol = random_molecule(size(rng), rng());
    const ModelParams params = init_params(cfg.model, cfg.seed * 1000003ULL + static_cast<std::uint64_t>(m));
    const GeometricGraph graph = build_radius_graph(mol.positions, cfg.model.cutoff, mol.atomic_numbers);
    const Topology topo = build_topology(graph);
    const EnergyForces ef = energy_and_forces(graph, topo, params);
    std::vector<double> tape, fd;
    std::vector<Vec3> x = graph.positions;
    Vec3 sum{};
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += ef.forces[i];
      for (int c = 0; c < 3; ++c) {
        const double keep = x[i][c];
        x[i][c] = keep + cfg.step;
        const double up = energy_of(params, x, graph.atomic_numbers, topo);
        x[i][c] = keep - cfg.step;
        const double down = energy_of(params, x, graph.atomic_numbers, topo);
        x[i][c] = keep;
        fd.push_back(-(up - down) / (2.0 * cfg.step));
        tape.push_back(ef.forces[i][c]);
      }
    }
    worst = std::max(worst, ad::relative_error(tape, fd));
    net = std::max(net, norm(sum));
  }
  return {at_most("forces vs central differences", worst, cfg.tolerance,
                  "over " + std::to_string(cfg.molecules) + " molecules"),
          at_most("net force", net, 1e-8)};
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

ScalingReport measure_forward_scaling(const ModelConfig& model, const std::vector<int>& sizes, double density,
                                      int repeats, std::uint64_t seed) {
  const ModelParams params = init_params(model, seed);
  ScalingReport report;
  for (int n : sizes) {
    const auto x = random_cloud(n, density, seed + static_cast<std::uint64_t>(n));
    const GeometricGraph graph = build_radius_graph(x, model.cutoff, std::vector<int>(x.size(), 6));
    const Topology topo = build_topology(graph);
    run(params, graph.positions, graph.atomic_numbers, topo);  // warm-up
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, repeats); ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      run(params, graph.positions, graph.atomic_numbers, topo);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    report.points.push_back({n, graph.num_edges(), best});
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : report.points) {
    mx += std::log(p.atoms);
    my += std::log(p.seconds);
  }
  const double k = static_cast<double>(report.points.size());
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : report.points) {
    sxy += (std::log(p.atoms) - mx) * (std::log(p.seconds) - my);
    sxx += (std::log(p.atoms) - mx) * (std::log(p.atoms) - mx);
  }
  report.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return report;
}

}  // namespace leftnet
