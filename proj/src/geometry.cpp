// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/geometry.hpp"

#include <cmath>
#include <random>

namespace leftnet {

bool is_valid_frame(const Frame& f, double tol) {
  for (int a = 0; a < 3; ++a) {
    if (!is_finite(f[a])) return false;
    if (std::abs(norm(f[a]) - 1.0) > tol) return false;
    for (int b = a + 1; b < 3; ++b) {
      if (std::abs(dot(f[a], f[b])) > tol) return false;
    }
  }
  return std::abs(f.as_rows().determinant() - 1.0) <= tol;
}

RigidMotion RigidMotion::make(const Mat3& rotation, const Vec3& translation) {
  const Mat3 gram = rotation * rotation.transposed();
  if (max_abs_diff(gram, Mat3::identity()) > 1e-10) {
    throw std::invalid_argument("RigidMotion: rotation matrix is not orthogonal");
  }
  RigidMotion g;
  g.rotation = rotation;
  g.translation = translation;
  g.improper = rotation.determinant() < 0.0;
  return g;
}

RigidMotion RigidMotion::compose(const RigidMotion& inner) const {
  RigidMotion g;
  g.rotation = rotation * inner.rotation;
  g.translation = rotation * inner.translation + translation;
  g.improper = improper != inner.improper;
  return g;
}

std::vector<Vec3> apply_motion(const RigidMotion& g, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(g.apply(p));
  return out;
}

RigidMotion random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double w = 0, x = 0, y = 0, z = 0, n = 0;
  while (n < 1e-6) {
    w = gauss(rng);
    x = gauss(rng);
    y = gauss(rng);
    z = gauss(rng);
    n = std::sqrt(w * w + x * x + y * y + z * z);
  }
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  RigidMotion g;
  Mat3& r = g.rotation;
  r(0, 0) = 1 - 2 * (y * y + z * z);
  r(0, 1) = 2 * (x * y - z * w);
  r(0, 2) = 2 * (x * z + y * w);
  r(1, 0) = 2 * (x * y + z * w);
  r(1, 1) = 1 - 2 * (x * x + z * z);
  r(1, 2) = 2 * (y * z - x * w);
  r(2, 0) = 2 * (x * z - y * w);
  r(2, 1) = 2 * (y * z + x * w);
  r(2, 2) = 1 - 2 * (x * x + y * y);
  return g;
}

RigidMotion reflection(const Vec3& normal) {
  const double n = norm(normal);
  if (n <= kDegenerateEps) throw DegenerateGeometry("reflection: zero normal");
  const Vec3 u = normal / n;
  RigidMotion g;
  g.rotation = Mat3::identity() - outer(u, u) * 2.0;
  g.improper = true;
  return g;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  const double n = norm(axis);
  if (n <= kDegenerateEps) throw DegenerateGeometry("axis_angle: zero axis");
  const Vec3 u = axis / n;
  Mat3 k;
  k(0, 1) = -u.z;
  k(0, 2) = u.y;
  k(1, 0) = u.z;
  k(1, 2) = -u.x;
  k(2, 0) = -u.y;
  k(2, 1) = u.x;
  return Mat3::identity() + k * std::sin(angle) + (k * k) * (1.0 - std::cos(angle));
}

double signed_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  return dot(p1 - p0, cross(p2 - p0, p3 - p0)) / 6.0;
}

}  // namespace leftnet
