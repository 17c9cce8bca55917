// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Equivariant frames, scalarization/tensorization and rigid motions.
//
// Everything here is templated on the scalar type so the same code runs on
// plain doubles and on the differentiable scalars from autodiff.hpp. The
// aliases Vec3, Mat3 and Frame are the double instantiations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "leftnet/errors.hpp"

namespace leftnet {

/// Norm threshold below which a frame construction is considered degenerate.
inline constexpr double kDegenerateEps = 1e-8;

/// SE3 keeps the signed projection on e2; E3 takes its absolute value.
enum class ScalarMode { kSE3, kE3 };

inline double value_of(double x) { return x; }

template <class T>
struct Vec3T {
  T x{};
  T y{};
  T z{};

  Vec3T() = default;
  Vec3T(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  template <class U>
  static Vec3T from(const Vec3T<U>& o) {
    return {T(o.x), T(o.y), T(o.z)};
  }

  T& operator[](int k) { return k == 0 ? x : (k == 1 ? y : z); }
  const T& operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }

  Vec3T operator+(const Vec3T& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3T operator-(const Vec3T& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3T operator-() const { return {-x, -y, -z}; }
  Vec3T operator*(const T& s) const { return {x * s, y * s, z * s}; }
  Vec3T operator/(const T& s) const { return {x / s, y / s, z / s}; }
  Vec3T& operator+=(const Vec3T& o) {
    x = x + o.x;
    y = y + o.y;
    z = z + o.z;
    return *this;
  }
  Vec3T& operator-=(const Vec3T& o) {
    x = x - o.x;
    y = y - o.y;
    z = z - o.z;
    return *this;
  }
};

template <class T>
Vec3T<T> operator*(const T& s, const Vec3T<T>& v) {
  return v * s;
}

using Vec3 = Vec3T<double>;

template <class T>
T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T squared_norm(const Vec3T<T>& a) {
  return dot(a, a);
}

template <class T>
T norm(const Vec3T<T>& a) {
  using std::sqrt;
  return sqrt(squared_norm(a));
}

inline Vec3 value_of(const Vec3T<double>& v) { return v; }

template <class T>
Vec3 value_of(const Vec3T<T>& v) {
  return {value_of(v.x), value_of(v.y), value_of(v.z)};
}

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// 3x3 matrix, row-major.
template <class T>
struct Mat3T {
  std::array<T, 9> m{};

  T& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
  const T& operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

  static Mat3T identity() {
    Mat3T out;
    for (int k = 0; k < 3; ++k) out(k, k) = T(1.0);
    return out;
  }

  static Mat3T from_rows(const Vec3T<T>& r0, const Vec3T<T>& r1, const Vec3T<T>& r2) {
    Mat3T out;
    for (int c = 0; c < 3; ++c) {
      out(0, c) = r0[c];
      out(1, c) = r1[c];
      out(2, c) = r2[c];
    }
    return out;
  }

  Vec3T<T> row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
  Vec3T<T> col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

  Mat3T operator+(const Mat3T& o) const {
    Mat3T out;
    for (std::size_t k = 0; k < 9; ++k) out.m[k] = m[k] + o.m[k];
    return out;
  }
  Mat3T operator-(const Mat3T& o) const {
    Mat3T out;
    for (std::size_t k = 0; k < 9; ++k) out.m[k] = m[k] - o.m[k];
    return out;
  }
  Mat3T operator*(const T& s) const {
    Mat3T out;
    for (std::size_t k = 0; k < 9; ++k) out.m[k] = m[k] * s;
    return out;
  }
  Mat3T& operator+=(const Mat3T& o) {
    for (std::size_t k = 0; k < 9; ++k) m[k] = m[k] + o.m[k];
    return *this;
  }

  Mat3T operator*(const Mat3T& o) const {
    Mat3T out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        out(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) + (*this)(r, 2) * o(2, c);
    return out;
  }

  Vec3T<T> operator*(const Vec3T<T>& v) const {
    return {dot(row(0), v), dot(row(1), v), dot(row(2), v)};
  }

  Mat3T transposed() const {
    Mat3T out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
    return out;
  }

  T determinant() const { return dot(row(0), cross(row(1), row(2))); }
};

using Mat3 = Mat3T<double>;

template <class T>
Mat3T<T> outer(const Vec3T<T>& a, const Vec3T<T>& b) {
  Mat3T<T> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = a[r] * b[c];
  return out;
}

template <class T>
Mat3 value_of(const Mat3T<T>& a) {
  Mat3 out;
  for (std::size_t k = 0; k < 9; ++k) out.m[k] = value_of(a.m[k]);
  return out;
}

/// Largest absolute entry of a - b.
inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < 9; ++k) worst = std::max(worst, std::abs(a.m[k] - b.m[k]));
  return worst;
}

inline double max_abs_diff(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

/// Orthonormal right-handed triple (e1, e2, e3), stored as row vectors.
template <class T>
struct FrameT {
  Vec3T<T> e1;
  Vec3T<T> e2;
  Vec3T<T> e3;

  const Vec3T<T>& operator[](int k) const { return k == 0 ? e1 : (k == 1 ? e2 : e3); }

  static FrameT identity() {
    return {{T(1.0), T(0.0), T(0.0)}, {T(0.0), T(1.0), T(0.0)}, {T(0.0), T(0.0), T(1.0)}};
  }

  Mat3T<T> as_rows() const { return Mat3T<T>::from_rows(e1, e2, e3); }
};

using Frame = FrameT<double>;

template <class T>
Frame value_of(const FrameT<T>& f) {
  return {value_of(f.e1), value_of(f.e2), value_of(f.e3)};
}

/// Checks orthonormality and right-handedness within `tol`.
bool is_valid_frame(const Frame& f, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Frame construction
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
FrameT<T> frame_from_directions(const Vec3T<T>& a, const Vec3T<T>& b) {
  const Vec3T<T> e1 = a / norm(a);
  const Vec3T<T> e2 = b / norm(b);
  return {e1, e2, cross(e1, e2)};
}

}  // namespace detail

/// e1 = a/|a|, e2 = normalized component of b orthogonal to a, e3 = e1 x e2.
template <class T>
std::optional<FrameT<T>> try_gram_schmidt(const Vec3T<T>& a, const Vec3T<T>& b) {
  if (norm(value_of(a)) <= kDegenerateEps) return std::nullopt;
  const Vec3T<T> e1 = a / norm(a);
  const Vec3T<T> ortho = b - e1 * dot(b, e1);
  if (norm(value_of(ortho)) <= kDegenerateEps) return std::nullopt;
  const Vec3T<T> e2 = ortho / norm(ortho);
  return FrameT<T>{e1, e2, cross(e1, e2)};
}

template <class T>
FrameT<T> gram_schmidt(const Vec3T<T>& a, const Vec3T<T>& b) {
  auto f = try_gram_schmidt(a, b);
  if (!f) throw DegenerateGeometry("gram_schmidt: near-zero or near-collinear input");
  return *f;
}

/// Edge frame on centralized positions:
/// e1 ~ x_i - x_j, e2 ~ x_i x x_j, e3 = e1 x e2.
template <class T>
std::optional<FrameT<T>> try_edge_frame(const Vec3T<T>& xi, const Vec3T<T>& xj) {
  const Vec3T<T> diff = xi - xj;
  const Vec3T<T> perp = cross(xi, xj);
  if (norm(value_of(diff)) <= kDegenerateEps || norm(value_of(perp)) <= kDegenerateEps) {
    return std::nullopt;
  }
  return detail::frame_from_directions(diff, perp);
}

template <class T>
FrameT<T> edge_frame(const Vec3T<T>& xi, const Vec3T<T>& xj) {
  auto f = try_edge_frame(xi, xj);
  if (!f) throw DegenerateGeometry("edge_frame: positions coincident or collinear with origin");
  return *f;
}

/// Node frame around the neighborhood centroid c:
/// e1 ~ x_i - c, e2 ~ c x x_i, e3 = e1 x e2.
template <class T>
std::optional<FrameT<T>> try_node_frame(const Vec3T<T>& xi, std::span<const Vec3T<T>> neighbors) {
  if (neighbors.empty()) return std::nullopt;
  Vec3T<T> centroid = neighbors[0];
  for (std::size_t k = 1; k < neighbors.size(); ++k) centroid += neighbors[k];
  centroid = centroid / T(static_cast<double>(neighbors.size()));
  const Vec3T<T> diff = xi - centroid;
  const Vec3T<T> perp = cross(centroid, xi);
  if (norm(value_of(diff)) <= kDegenerateEps || norm(value_of(perp)) <= kDegenerateEps) {
    return std::nullopt;
  }
  return detail::frame_from_directions(diff, perp);
}

template <class T>
FrameT<T> node_frame(const Vec3T<T>& xi, std::span<const Vec3T<T>> neighbors) {
  if (neighbors.empty()) throw DegenerateGeometry("node_frame: empty neighborhood");
  auto f = try_node_frame(xi, neighbors);
  if (!f) throw DegenerateGeometry("node_frame: degenerate neighborhood centroid");
  return *f;
}

inline Frame node_frame(const Vec3& xi, const std::vector<Vec3>& neighbors) {
  return node_frame(xi, std::span<const Vec3>(neighbors));
}

// ---------------------------------------------------------------------------
// Scalarization / tensorization
// ---------------------------------------------------------------------------

template <class T>
std::array<T, 3> scalarize(const Vec3T<T>& v, const FrameT<T>& f, ScalarMode mode = ScalarMode::kSE3) {
  using std::abs;
  T second = dot(v, f.e2);
  if (mode == ScalarMode::kE3) second = abs(second);
  return {dot(v, f.e1), second, dot(v, f.e3)};
}

template <class T>
Vec3T<T> tensorize(const std::array<T, 3>& t, const FrameT<T>& f) {
  return f.e1 * t[0] + f.e2 * t[1] + f.e3 * t[2];
}

/// Coefficients C[a][b] = e_a^T T e_b. In E3 mode entries with exactly one
/// e2 index change sign under reflection, so their absolute value is taken.
template <class T>
Mat3T<T> scalarize_rank2(const Mat3T<T>& tensor, const FrameT<T>& f,
                         ScalarMode mode = ScalarMode::kSE3) {
  using std::abs;
  Mat3T<T> out;
  for (int a = 0; a < 3; ++a) {
    const Vec3T<T> ta = tensor.transposed() * f[a];  // T^T e_a, so dot with e_b gives e_a^T T e_b
    for (int b = 0; b < 3; ++b) {
      T c = dot(ta, f[b]);
      if (mode == ScalarMode::kE3 && ((a == 1) != (b == 1))) c = abs(c);
      out(a, b) = c;
    }
  }
  return out;
}

template <class T>
Mat3T<T> tensorize_rank2(const Mat3T<T>& coeffs, const FrameT<T>& f) {
  Mat3T<T> out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) out += outer(f[a], f[b]) * coeffs(a, b);
  return out;
}

/// One rank-2 tensor per channel from per-channel coefficient matrices.
template <class T>
std::vector<Mat3T<T>> tensorize_rank2(std::span<const Mat3T<T>> coeffs, const FrameT<T>& f) {
  std::vector<Mat3T<T>> out;
  out.reserve(coeffs.size());
  for (const auto& c : coeffs) out.push_back(tensorize_rank2(c, f));
  return out;
}

// ---------------------------------------------------------------------------
// Frame transition
// ---------------------------------------------------------------------------

/// R with R[k][l] = e_k^i . e_l^j, so that F_i = R F_j.
template <class T>
Mat3T<T> frame_transition(const FrameT<T>& fi, const FrameT<T>& fj) {
  Mat3T<T> out;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) out(k, l) = dot(fi[k], fj[l]);
  return out;
}

/// The (3,3) entry of a transition matrix: e3^i . e3^j, the cosine of the
/// dihedral between the two frame planes.
inline double torsion_from_transition(const Mat3& r) { return r(2, 2); }

// ---------------------------------------------------------------------------
// Rigid motions
// ---------------------------------------------------------------------------

struct RigidMotion {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{};
  bool improper = false;

  static RigidMotion identity() { return {}; }

  /// Validates orthogonality and sets `improper` from the determinant sign.
  static RigidMotion make(const Mat3& rotation, const Vec3& translation);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_linear(const Vec3& v) const { return rotation * v; }

  /// (*this) after `inner`: x -> this(inner(x)).
  RigidMotion compose(const RigidMotion& inner) const;
};

std::vector<Vec3> apply_motion(const RigidMotion& g, std::span<const Vec3> points);

/// Haar-uniform proper rotation from a normalized Gaussian quaternion.
RigidMotion random_rotation(std::uint64_t seed);

/// Reflection through the plane with the given normal (det = -1).
RigidMotion reflection(const Vec3& normal);

/// Rotation about a unit axis by `angle` radians (Rodrigues).
Mat3 axis_angle(const Vec3& axis, double angle);

/// Signed volume of the tetrahedron (p0, p1, p2, p3).
double signed_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);

}  // namespace leftnet
