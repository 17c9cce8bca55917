// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/isomorphism.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "leftnet/datasets.hpp"
#include "leftnet/errors.hpp"

namespace leftnet {
namespace {

// Distances may drift by up to ~2 sqrt(n) * rmsd between congruent sets, so
// pruning uses a looser bound and Kabsch makes the final call.
constexpr double kPruneTol = 1e-4;

bool same_features(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > 1e-9) return false;
  }
  return true;
}

struct PointSet {
  std::vector<Vec3> positions;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<char>> adjacent;

  int size() const { return static_cast<int>(positions.size()); }
};

PointSet point_set(const LocalSubgraph& s, const std::vector<int>& members) {
  PointSet p;
  const int n = static_cast<int>(members.size());
  p.adjacent.assign(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int a = 0; a < n; ++a) {
    p.positions.push_back(s.positions[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])]);
    p.features.push_back(s.features[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])]);
    for (int b = 0; b < n; ++b) {
      p.adjacent[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          s.adjacent(members[static_cast<std::size_t>(a)], members[static_cast<std::size_t>(b)]);
    }
  }
  return p;
}

struct MatchResult {
  bool found = false;
  double rmsd = std::numeric_limits<double>::infinity();
  std::vector<int> mapping;
  KabschResult alignment;
};

// Backtracking over feature- and adjacency-preserving bijections whose
// pairwise distances agree; the first `fixed` indices map to themselves.
class Matcher {
 public:
  Matcher(const PointSet& a, const PointSet& b, int fixed) : a_(a), b_(b), fixed_(fixed) {}

  MatchResult run() {
    if (a_.size() != b_.size()) return best_;
    const int n = a_.size();
    map_.assign(static_cast<std::size_t>(n), -1);
    used_.assign(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < fixed_; ++k) {
      if (!compatible(k, k)) return best_;
      map_[static_cast<std::size_t>(k)] = k;
      used_[static_cast<std::size_t>(k)] = 1;
    }
    search(fixed_);
    return best_;
  }

 private:
  bool compatible(int p, int q) const {
    if (!same_features(a_.features[static_cast<std::size_t>(p)], b_.features[static_cast<std::size_t>(q)])) {
      return false;
    }
    for (int r = 0; r < p; ++r) {
      const int s = map_[static_cast<std::size_t>(r)];
      if (s < 0) continue;
      if (a_.adjacent[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)] !=
          b_.adjacent[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)]) {
        return false;
      }
      const double da = norm(a_.positions[static_cast<std::size_t>(p)] - a_.positions[static_cast<std::size_t>(r)]);
      const double db = norm(b_.positions[static_cast<std::size_t>(q)] - b_.positions[static_cast<std::size_t>(s)]);
      if (std::abs(da - db) > kPruneTol) return false;
    }
    return true;
  }

  void search(int p) {
    if (best_.found) return;
    const int n = a_.size();
    if (p == n) {
      std::vector<Vec3> y;
      for (int k = 0; k < n; ++k) y.push_back(b_.positions[static_cast<std::size_t>(map_[static_cast<std::size_t>(k)])]);
      const KabschResult fit = kabsch_se3(a_.positions, y);
      if (fit.rmsd < best_.rmsd) {
        best_.rmsd = fit.rmsd;
        best_.mapping = map_;
        best_.alignment = fit;
      }
      if (fit.rmsd <= kIsometryTol) best_.found = true;
      return;
    }
    for (int q = 0; q < n; ++q) {
      if (used_[static_cast<std::size_t>(q)]) continue;
      map_[static_cast<std::size_t>(p)] = q;
      if (compatible(p, q)) {
        used_[static_cast<std::size_t>(q)] = 1;
        search(p + 1);
        used_[static_cast<std::size_t>(q)] = 0;
      }
      map_[static_cast<std::size_t>(p)] = -1;
      if (best_.found) return;
    }
  }

  const PointSet& a_;
  const PointSet& b_;
  int fixed_;
  std::vector<int> map_;
  std::vector<char> used_;
  MatchResult best_;
};

// Kuhn's augmenting paths on a boolean compatibility matrix.
std::vector<int> perfect_matching(const std::vector<std::vector<char>>& ok) {
  const int n = static_cast<int>(ok.size());
  std::vector<int> match_right(static_cast<std::size_t>(n), -1);
  std::function<bool(int, std::vector<char>&)> augment = [&](int left, std::vector<char>& seen) {
    for (int right = 0; right < n; ++right) {
      if (!ok[static_cast<std::size_t>(left)][static_cast<std::size_t>(right)] ||
          seen[static_cast<std::size_t>(right)]) {
        continue;
      }
      seen[static_cast<std::size_t>(right)] = 1;
      const int prev = match_right[static_cast<std::size_t>(right)];
      if (prev < 0 || augment(prev, seen)) {
        match_right[static_cast<std::size_t>(right)] = left;
        return true;
      }
    }
    return false;
  };
  for (int left = 0; left < n; ++left) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    if (!augment(left, seen)) return {};
  }
  std::vector<int> match_left(static_cast<std::size_t>(n), -1);
  for (int right = 0; right < n; ++right) match_left[static_cast<std::size_t>(match_right[static_cast<std::size_t>(right)])] = right;
  return match_left;
}

// Local indices of S_{u-0}: center, u, then common neighbors ascending.
std::vector<int> mutual_members(const LocalSubgraph& s, int u) {
  std::vector<int> members{0, u};
  for (int w = 1; w < s.size(); ++w) {
    if (w != u && s.adjacent(0, w) && s.adjacent(u, w)) members.push_back(w);
  }
  return members;
}

double center_distance(const LocalSubgraph& s, int u) {
  return norm(s.positions[static_cast<std::size_t>(u)] - s.positions[0]);
}

bool same_center(const LocalSubgraph& a, const LocalSubgraph& b) {
  return a.size() == b.size() && same_features(a.features[0], b.features[0]);
}

RigidMotion to_motion(const KabschResult& fit) {
  return RigidMotion::make(fit.rotation, fit.translation);
}

}  // namespace

bool LocalSubgraph::adjacent(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges.begin(), edges.end(), Edge{a, b});
}

LocalSubgraph local_subgraph(const GeometricGraph& graph, int center) {
  if (center < 0 || center >= graph.num_nodes()) {
    throw std::out_of_range("local_subgraph: center out of range");
  }
  LocalSubgraph s;
  s.center = center;
  s.nodes.push_back(center);
  for (const auto& [i, j] : graph.edges) {
    if (i == center) s.nodes.push_back(j);
  }
  std::sort(s.nodes.begin() + 1, s.nodes.end());
  s.nodes.erase(std::unique(s.nodes.begin() + 1, s.nodes.end()), s.nodes.end());
  std::vector<int> local(static_cast<std::size_t>(graph.num_nodes()), -1);
  for (int k = 0; k < s.size(); ++k) {
    const int node = s.nodes[static_cast<std::size_t>(k)];
    local[static_cast<std::size_t>(node)] = k;
    s.positions.push_back(graph.positions[static_cast<std::size_t>(node)]);
    s.features.push_back(graph.node_features.empty()
                             ? std::vector<double>{}
                             : graph.node_features[static_cast<std::size_t>(node)]);
  }
  for (const auto& [i, j] : graph.edges) {
    const int a = local[static_cast<std::size_t>(i)];
    const int b = local[static_cast<std::size_t>(j)];
    if (a >= 0 && b >= 0 && a < b) s.edges.emplace_back(a, b);
  }
  std::sort(s.edges.begin(), s.edges.end());
  s.edges.erase(std::unique(s.edges.begin(), s.edges.end()), s.edges.end());
  return s;
}

KabschResult kabsch_se3(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kabsch_se3: size mismatch");
  KabschResult out;
  if (x.empty()) return out;
  const double n = static_cast<double>(x.size());
  Vec3 cx{}, cy{};
  for (std::size_t k = 0; k < x.size(); ++k) {
    cx = cx + x[k];
    cy = cy + y[k];
  }
  cx = cx / n;
  cy = cy / n;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Vec3 a = x[k] - cx;
    const Vec3 b = y[k] - cy;
    h += Eigen::Vector3d(a[0], a[1], a[2]) * Eigen::Vector3d(b[0], b[1], b[2]).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = v * d * u.transpose();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out.rotation(a, b) = r(a, b);
  }
  out.translation = cy - out.rotation * cx;
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sq += squared_norm(out.rotation * x[k] + out.translation - y[k]);
  out.rmsd = std::sqrt(sq / n);
  return out;
}

IsometryReport tree_isometric(const LocalSubgraph& a, const LocalSubgraph& b) {
  IsometryReport report;
  report.level = IsometryLevel::kTree;
  if (!same_center(a, b)) return report;
  const int m = a.size() - 1;
  std::vector<std::vector<char>> ok(static_cast<std::size_t>(m), std::vector<char>(static_cast<std::size_t>(m), 0));
  for (int u = 1; u <= m; ++u) {
    for (int w = 1; w <= m; ++w) {
      ok[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(w - 1)] =
          same_features(a.features[static_cast<std::size_t>(u)], b.features[static_cast<std::size_t>(w)]) &&
          std::abs(center_distance(a, u) - center_distance(b, w)) <= kIsometryTol;
    }
  }
  const std::vector<int> match = perfect_matching(ok);
  if (m > 0 && match.empty()) return report;
  report.isometric = true;
  report.bijection.push_back(0);
  for (int u = 0; u < m; ++u) report.bijection.push_back(match[static_cast<std::size_t>(u)] + 1);
  return report;
}

IsometryReport triangular_isometric(const LocalSubgraph& a, const LocalSubgraph& b) {
  IsometryReport report;
  report.level = IsometryLevel::kTriangular;
  const int m_a = a.size() - 1;
  std::vector<PointSet> subs_a, subs_b;
  for (int u = 1; u <= m_a; ++u) {
    const auto members = mutual_members(a, u);
    if (static_cast<int>(members.size()) > kMaxMatchNodes) throw TooLarge("mutual substructure exceeds 8 nodes");
    subs_a.push_back(point_set(a, members));
  }
  for (int u = 1; u < b.size(); ++u) {
    const auto members = mutual_members(b, u);
    if (static_cast<int>(members.size()) > kMaxMatchNodes) throw TooLarge("mutual substructure exceeds 8 nodes");
    subs_b.push_back(point_set(b, members));
  }
  if (!same_center(a, b)) return report;

  const auto m = static_cast<std::size_t>(m_a);
  std::vector<std::vector<char>> ok(m, std::vector<char>(m, 0));
  std::vector<std::vector<MatchResult>> fits(m, std::vector<MatchResult>(m));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t w = 0; w < m; ++w) {
      if (!same_features(a.features[u + 1], b.features[w + 1]) ||
          std::abs(center_distance(a, static_cast<int>(u + 1)) - center_distance(b, static_cast<int>(w + 1))) >
              kIsometryTol) {
        continue;
      }
      fits[u][w] = Matcher(subs_a[u], subs_b[w], 2).run();
      best = std::min(best, fits[u][w].rmsd);
      ok[u][w] = fits[u][w].found;
    }
  }
  const std::vector<int> match = perfect_matching(ok);
  if (m > 0 && match.empty()) {
    report.residual = best;
    return report;
  }
  report.isometric = true;
  report.bijection.push_back(0);
  for (std::size_t u = 0; u < m; ++u) {
    const auto w = static_cast<std::size_t>(match[u]);
    report.bijection.push_back(match[u] + 1);
    report.motions.push_back(to_motion(fits[u][w].alignment));
    report.residual = std::max(report.residual, fits[u][w].rmsd);
  }
  return report;
}

IsometryReport subgraph_isometric(const LocalSubgraph& a, const LocalSubgraph& b) {
  if (a.size() > kMaxMatchNodes || b.size() > kMaxMatchNodes) {
    throw TooLarge("subgraph exceeds 8 nodes");
  }
  IsometryReport report;
  report.level = IsometryLevel::kSubgraph;
  if (!same_center(a, b)) return report;
  std::vector<int> all(static_cast<std::size_t>(a.size()));
  for (int k = 0; k < a.size(); ++k) all[static_cast<std::size_t>(k)] = k;
  const MatchResult fit = Matcher(point_set(a, all), point_set(b, all), 1).run();
  report.residual = fit.mapping.empty() ? std::numeric_limits<double>::infinity() : fit.rmsd;
  if (!fit.found) return report;
  report.isometric = true;
  report.bijection = fit.mapping;
  report.motions.push_back(to_motion(fit.alignment));
  return report;
}

// ---------------------------------------------------------------------------
// Pair generators
// ---------------------------------------------------------------------------

namespace {

RigidMotion random_placement(std::mt19937_64& rng) {
  RigidMotion g = random_rotation(rng());
  std::normal_distribution<double> n(0.0, 3.0);
  g.translation = Vec3{n(rng), n(rng), n(rng)};
  return g;
}

GeometricGraph placed(const std::vector<Vec3>& x, const std::vector<int>& z, const RigidMotion& g) {
  return build_radius_graph(apply_motion(g, x), kPairCutoff, z);
}

Vec3 unit(const Vec3& v) { return v / norm(v); }

bool min_distance_above(const std::vector<Vec3>& p, const std::vector<Vec3>& q, double bound) {
  for (const auto& x : p) {
    for (const auto& y : q) {
      if (norm(x - y) <= bound) return false;
    }
  }
  return true;
}

// Hinge i-u along x with w1, w2 adjacent to both; the pair differs only in
// the dihedral between w1 and w2, which keeps every edge length equal.
std::optional<GraphPair> try_tree_not_triangular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double hinge = 0.9 + 0.3 * uni(rng);
  const double x1 = 0.3 + (hinge - 0.6) * uni(rng);
  const double x2 = 0.3 + (hinge - 0.6) * uni(rng);
  const double r1 = 1.35 + 0.25 * uni(rng);
  const double r2 = 1.35 + 0.25 * uni(rng);
  const double theta = 2.0 * std::numbers::pi * uni(rng);
  const double deg = std::numbers::pi / 180.0;
  const double delta_a = (95.0 + 30.0 * uni(rng)) * deg;
  const double delta_b = (140.0 + 35.0 * uni(rng)) * deg;
  auto build = [&](double delta) {
    return std::vector<Vec3>{{0.0, 0.0, 0.0},
                             {hinge, 0.0, 0.0},
                             {x1, r1 * std::cos(theta), r1 * std::sin(theta)},
                             {x2, r2 * std::cos(theta + delta), r2 * std::sin(theta + delta)}};
  };
  const std::vector<int> z{6, 6, 7, 8};
  GraphPair pair{placed(build(delta_a), z, random_placement(rng)),
                 placed(build(delta_b), z, random_placement(rng)), 0};
  if (pair.first.num_edges() != 10 || pair.second.num_edges() != 10) return std::nullopt;
  for (const auto& g : {pair.first, pair.second}) {
    if (norm(g.positions[2] - g.positions[3]) < kPairCutoff + 0.05) return std::nullopt;
  }
  const auto a = local_subgraph(pair.first, 0);
  const auto b = local_subgraph(pair.second, 0);
  if (!tree_isometric(a, b).isometric || triangular_isometric(a, b).isometric ||
      subgraph_isometric(a, b).isometric) {
    return std::nullopt;
  }
  return pair;
}

// Two congruent triangles sharing the center, on opposite sides of it; the
// pair differs in how the second triangle is turned about its own axis.
std::optional<GraphPair> try_triangular_not_subgraph(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double la = 1.2 + 0.3 * uni(rng);
  const double lb = 1.2 + 0.3 * uni(rng);
  const double gamma = (45.0 + 30.0 * uni(rng)) * std::numbers::pi / 180.0;
  const RigidMotion q = random_rotation(rng());
  const Vec3 a1 = q.apply_linear(Vec3{la, 0.0, 0.0});
  const Vec3 b1 = q.apply_linear(Vec3{lb * std::cos(gamma), lb * std::sin(gamma), 0.0});
  const Vec3 axis = unit(-(a1 + b1));
  const double phi_a = 2.0 * std::numbers::pi * uni(rng);
  const double phi_b = phi_a + (40.0 + 280.0 * uni(rng)) * std::numbers::pi / 180.0;
  auto build = [&](double phi) {
    const Mat3 r = axis_angle(axis, phi);
    return std::vector<Vec3>{{0.0, 0.0, 0.0}, a1, b1, r * (-a1), r * (-b1)};
  };
  const std::vector<int> z{6, 7, 8, 7, 8};
  const auto xa = build(phi_a);
  const auto xb = build(phi_b);
  for (const auto& x : {xa, xb}) {
    if (!min_distance_above({x[1], x[2]}, {x[3], x[4]}, kPairCutoff + 0.05)) return std::nullopt;
  }
  GraphPair pair{placed(xa, z, random_placement(rng)), placed(xb, z, random_placement(rng)), 0};
  if (pair.first.num_edges() != 12 || pair.second.num_edges() != 12) return std::nullopt;
  const auto a = local_subgraph(pair.first, 0);
  const auto b = local_subgraph(pair.second, 0);
  if (!tree_isometric(a, b).isometric || !triangular_isometric(a, b).isometric ||
      subgraph_isometric(a, b).isometric) {
    return std::nullopt;
  }
  return pair;
}

GeometricGraph molecule_graph(const XyzFrame& frame) {
  return build_radius_graph(frame.positions, kPairCutoff, frame.atomic_numbers);
}

}  // namespace

GraphPair generate_pair(PairKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eed'ba5e'0f'1e'f7ULL);
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto pair = kind == PairKind::kTreeNotTriangular ? try_tree_not_triangular(rng)
                                                     : try_triangular_not_subgraph(rng);
    if (pair) return *std::move(pair);
  }
  throw GenerationFailed("generate_pair: no valid pair after 100 attempts");
}

GraphPair random_pair(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 17);
  std::uniform_int_distribution<int> size(4, 7);
  const XyzFrame mol = random_molecule(size(rng), rng());
  const GeometricGraph base = molecule_graph(mol);
  switch (seed % 6) {
    case 0: {
      // Rigid copy with the non-center atoms relabelled.
      std::vector<int> order(mol.positions.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
      std::shuffle(order.begin() + 1, order.end(), rng);
      XyzFrame shuffled = mol;
      for (std::size_t k = 0; k < order.size(); ++k) {
        shuffled.positions[k] = mol.positions[static_cast<std::size_t>(order[k])];
        shuffled.atomic_numbers[k] = mol.atomic_numbers[static_cast<std::size_t>(order[k])];
      }
      return {base, placed(shuffled.positions, shuffled.atomic_numbers, random_placement(rng)), 0};
    }
    case 1: {
      const RigidMotion mirror = reflection(Vec3{0.0, 0.0, 1.0}).compose(random_placement(rng));
      return {base, placed(mol.positions, mol.atomic_numbers, mirror), 0};
    }
    case 2: {
      XyzFrame moved = mol;
      std::uniform_int_distribution<std::size_t> pick(1, moved.positions.size() - 1);
      std::normal_distribution<double> n(0.0, 0.15);
      moved.positions[pick(rng)] += Vec3{n(rng), n(rng), n(rng)};
      return {base, molecule_graph(moved), 0};
    }
    case 3:
      return {base, molecule_graph(random_molecule(static_cast<int>(mol.positions.size()), rng())), 0};
    case 4:
      return generate_pair(PairKind::kTreeNotTriangular, rng());
    default:
      return generate_pair(PairKind::kTriangularNotSubgraph, rng());
  }
}

double embedding_distance(const Embedding& embed, const GraphPair& pair) {
  const auto a = embed(pair.first);
  const auto b = embed(pair.second);
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sq);
}

bool discrimination_test(const Embedding& embed, const GraphPair& pair, double threshold) {
  return embedding_distance(embed, pair) > threshold;
}

std::pair<double, double> fa_identity_check(const Vec3& h_b, const Vec3& h_c) {
  const double lhs = dot(h_b, h_c);
  const double rhs = 0.5 * (squared_norm(h_b + h_c) - squared_norm(h_b) - squared_norm(h_c));
  return {lhs, rhs};
}

Mat3 ft_from_messages(const Frame& f_i, const Frame& f_j) {
  Mat3 r;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      r(k, l) = 0.5 * (squared_norm(f_i[k] + f_j[l]) - squared_norm(f_i[k]) - squared_norm(f_j[l]));
    }
  }
  return r;
}

std::string to_string(IsometryLevel level) {
  switch (level) {
    case IsometryLevel::kTree: return "tree";
    case IsometryLevel::kTriangular: return "triangular";
    case IsometryLevel::kSubgraph: return "subgraph";
  }
  return "unknown";
}

}  // namespace leftnet
