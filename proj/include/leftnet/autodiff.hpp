// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Differentiable scalars.
//
// Var records onto a thread-local reverse-mode tape; Dual<S> carries a
// forward-mode tangent over any scalar S. Dual<Var> gives Hessian-vector
// products, which is what force-matching training needs: the gradient of
// r . dE/dx with respect to parameters, for a fixed residual r.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "leftnet/geometry.hpp"

namespace leftnet::ad {

using leftnet::value_of;

struct Var {
  double v = 0.0;
  std::int32_t id = -1;  // -1 marks a constant that never enters the tape

  Var() = default;
  Var(double value) : v(value) {}  // NOLINT: constants convert implicitly
  Var(double value, std::int32_t node) : v(value), id(node) {}

  bool is_constant() const { return id < 0; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
};

/// Append-only record of Var operations. Node k stores its parents and the
/// local partial derivatives d(node k)/d(parent).
class Tape {
 public:
  Tape() { offsets_.push_back(0); }

  /// A fresh independent variable.
  Var variable(double value) {
    offsets_.push_back(static_cast<std::uint32_t>(count_));
    return Var(value, static_cast<std::int32_t>(offsets_.size() - 2));
  }

  /// Records a node with up to two parents; constant parents are skipped.
  Var record(double value, const Var& a, double da) {
    if (!a.is_constant()) add_parent(a.id, da);
    return end_node(value);
  }
  Var record(double value, const Var& a, double da, const Var& b, double db) {
    if (!a.is_constant()) add_parent(a.id, da);
    if (!b.is_constant()) add_parent(b.id, db);
    return end_node(value);
  }

  // Streaming construction for nodes with many parents: add_parent calls
  // followed by end_node.
  void add_parent(std::int32_t parent, double partial) {
    if (count_ == parents_.size()) grow(1);
    add_parent_unchecked(parent, partial);
  }
  /// Room for `n` further add_parent_unchecked calls.
  void reserve_parents(std::size_t n) {
    if (count_ + n > parents_.size()) grow(n);
  }
  void add_parent_unchecked(std::int32_t parent, double partial) {
    parents_[count_] = parent;
    partials_[count_] = partial;
    ++count_;
  }
  /// Closes the node; returns a constant if no parent was added.
  Var end_node(double value) {
    if (count_ == offsets_.back()) return Var(value);
    offsets_.push_back(static_cast<std::uint32_t>(count_));
    return Var(value, static_cast<std::int32_t>(offsets_.size() - 2));
  }

  /// y = W x + b with constant W and b, recorded as `out` consecutive nodes
  /// whose backward pass is a single transposed product. Only input ids are
  /// stored: W is read again through the pointer in adjoints(), so it must
  /// outlive that call.
  void linear_block(const Var* w, const Var* b, const Var* x, int in, int out, Var* y);
  void linear_block(const double* w, const double* b, const Var* x, int in, int out, Var* y);

  /// Adjoints d(root)/d(node) for every node recorded so far.
  std::vector<double> adjoints(const Var& root) const;

  std::size_t size() const { return offsets_.size() - 1; }
  /// Forgets all nodes but keeps the allocated storage.
  void clear();

 private:
  void grow(std::size_t n);
  template <class W>
  void push_block(const W* w, const W* b, const Var* x, int in, int out, Var* y);

  struct LinearBlock {
    std::int32_t first = 0;
    std::int32_t last = 0;
    const Var* w = nullptr;        // exactly one of w / w_plain is set
    const double* w_plain = nullptr;
    int in = 0;
    std::size_t inputs = 0;  // offset into block_inputs_
  };

  std::size_t count_ = 0;  // parents in use; the vectors below are capacity
  std::vector<std::uint32_t> offsets_;
  std::vector<std::int32_t> parents_;
  std::vector<double> partials_;
  std::vector<LinearBlock> blocks_;
  std::vector<std::int32_t> block_inputs_;
};

namespace detail {
inline thread_local Tape* active = nullptr;
[[noreturn]] void no_active_tape(const char* op);

inline Tape& tape_for(const char* op) {
  if (active == nullptr) no_active_tape(op);
  return *active;
}

inline Var unary(const char* op, double value, const Var& x, double dx) {
  if (x.is_constant()) return Var(value);
  return tape_for(op).record(value, x, dx);
}
}  // namespace detail

/// Tape currently receiving operations on this thread, or nullptr.
inline Tape* active_tape() { return detail::active; }

/// Makes `tape` the active tape for the lifetime of the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : previous_(detail::active) { detail::active = &tape; }
  ~TapeScope() { detail::active = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

inline double value_of(const Var& x) { return x.v; }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }

inline Var operator+(const Var& a, const Var& b) {
  if (a.is_constant()) {
    if (b.is_constant()) return Var(a.v + b.v);
    if (a.v == 0.0) return b;
  } else if (b.is_constant() && b.v == 0.0) {
    return a;
  }
  return detail::tape_for("+").record(a.v + b.v, a, 1.0, b, 1.0);
}

inline Var operator-(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.v - b.v);
  if (b.is_constant() && b.v == 0.0) return a;
  return detail::tape_for("-").record(a.v - b.v, a, 1.0, b, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
  if (a.is_constant()) {
    if (b.is_constant() || a.v == 0.0) return Var(a.v * b.v);
    if (a.v == 1.0) return b;
  } else if (b.is_constant()) {
    // Multiplying by an exact constant zero kills the dependency; this keeps
    // zero tangents of Dual<Var> off the tape.
    if (b.v == 0.0) return Var(0.0);
    if (b.v == 1.0) return a;
  }
  return detail::tape_for("*").record(a.v * b.v, a, b.v, b, a.v);
}

inline Var operator/(const Var& a, const Var& b) {
  const double q = a.v / b.v;
  if (a.is_constant() && (b.is_constant() || a.v == 0.0)) return Var(q);
  return detail::tape_for("/").record(q, a, 1.0 / b.v, b, -q / b.v);
}

inline Var operator-(const Var& a) { return detail::unary("neg", -a.v, a, -1.0); }

inline Var sqrt(const Var& x) {
  const double r = std::sqrt(x.v);
  return detail::unary("sqrt", r, x, 0.5 / r);
}
inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return detail::unary("exp", e, x, e);
}
inline Var log(const Var& x) { return detail::unary("log", std::log(x.v), x, 1.0 / x.v); }
inline Var sin(const Var& x) { return detail::unary("sin", std::sin(x.v), x, std::cos(x.v)); }
inline Var cos(const Var& x) { return detail::unary("cos", std::cos(x.v), x, -std::sin(x.v)); }
inline Var abs(const Var& x) {
  return detail::unary("abs", std::abs(x.v), x, x.v < 0.0 ? -1.0 : 1.0);
}
inline Var sigmoid(const Var& x) {
  const double s = sigmoid(x.v);
  return detail::unary("sigmoid", s, x, s * (1.0 - s));
}
inline Var silu(const Var& x) {
  const double s = sigmoid(x.v);
  return detail::unary("silu", x.v * s, x, s + x.v * s * (1.0 - s));
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }

// ---------------------------------------------------------------------------
// Forward-mode dual numbers
// ---------------------------------------------------------------------------

template <class S>
struct Dual {
  S v{};
  S t{};

  Dual() = default;
  Dual(double value) : v(value), t(0.0) {}  // NOLINT: constants convert implicitly
  Dual(S value, S tangent) : v(value), t(tangent) {}

  friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.t + b.t}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.t - b.t}; }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.t}; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return {a.v * b.v, a.t * b.v + a.v * b.t};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const S q = a.v / b.v;
    return {q, (a.t - q * b.t) / b.v};
  }
  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }

  friend Dual sqrt(const Dual& x) {
    using std::sqrt;
    const S r = sqrt(x.v);
    return {r, x.t / (r * 2.0)};
  }
  friend Dual exp(const Dual& x) {
    using std::exp;
    const S e = exp(x.v);
    return {e, x.t * e};
  }
  friend Dual log(const Dual& x) {
    using std::log;
    return {log(x.v), x.t / x.v};
  }
  friend Dual sin(const Dual& x) {
    using std::cos;
    using std::sin;
    return {sin(x.v), x.t * cos(x.v)};
  }
  friend Dual cos(const Dual& x) {
    using std::cos;
    using std::sin;
    return {cos(x.v), -(x.t * sin(x.v))};
  }
  friend Dual abs(const Dual& x) {
    using std::abs;
    const double sign = value_of(x.v) < 0.0 ? -1.0 : 1.0;
    return {abs(x.v), x.t * sign};
  }
  friend Dual sigmoid(const Dual& x) {
    const S s = sigmoid(x.v);
    return {s, x.t * (s * (1.0 - s))};
  }
  friend Dual silu(const Dual& x) {
    const S s = sigmoid(x.v);
    return {x.v * s, x.t * (s + x.v * s * (1.0 - s))};
  }
};

template <class S>
double value_of(const Dual<S>& x) {
  return value_of(x.v);
}

// ---------------------------------------------------------------------------
// Dense layers: y[o] = b[o] + sum_i W[o * in + i] * x[i]
// ---------------------------------------------------------------------------

void dense(const double* w, const double* b, const double* x, int in, int out, double* y);
void dense(const Var* w, const Var* b, const Var* x, int in, int out, Var* y);
/// Constant weights; `w` and `b` must outlive the tape's adjoints() call.
void dense(const double* w, const double* b, const Var* x, int in, int out, Var* y);

/// Single pass for the forward-over-reverse case used in force training.
void dense(const Dual<Var>* w, const Dual<Var>* b, const Dual<Var>* x, int in, int out, Dual<Var>* y);

template <class S>
void dense(const Dual<S>* w, const Dual<S>* b, const Dual<S>* x, int in, int out, Dual<S>* y) {
  const std::size_t nw = static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
  std::vector<S> wv(nw), wt(nw), xv(static_cast<std::size_t>(in)), xt(static_cast<std::size_t>(in));
  std::vector<S> bv(static_cast<std::size_t>(out)), bt(static_cast<std::size_t>(out));
  std::vector<S> zero(static_cast<std::size_t>(out), S(0.0));
  for (std::size_t k = 0; k < nw; ++k) {
    wv[k] = w[k].v;
    wt[k] = w[k].t;
  }
  for (int k = 0; k < in; ++k) {
    xv[static_cast<std::size_t>(k)] = x[k].v;
    xt[static_cast<std::size_t>(k)] = x[k].t;
  }
  for (int k = 0; k < out; ++k) {
    bv[static_cast<std::size_t>(k)] = b ? b[k].v : S(0.0);
    bt[static_cast<std::size_t>(k)] = b ? b[k].t : S(0.0);
  }
  std::vector<S> yv(static_cast<std::size_t>(out)), y1(static_cast<std::size_t>(out)),
      y2(static_cast<std::size_t>(out));
  dense(wv.data(), bv.data(), xv.data(), in, out, yv.data());
  dense(wv.data(), bt.data(), xt.data(), in, out, y1.data());
  dense(wt.data(), zero.data(), xv.data(), in, out, y2.data());
  for (int k = 0; k < out; ++k) {
    const auto u = static_cast<std::size_t>(k);
    y[k] = Dual<S>(yv[u], y1[u] + y2[u]);
  }
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences (f(x + eps e_k) - f(x - eps e_k)) / (2 eps).
std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> x, double eps);

/// ||a - b|| / max(||b||, floor): the vector-norm relative error used by
/// every gradient check in the library.
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-8);

}  // namespace leftnet::ad
