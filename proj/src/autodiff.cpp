// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/autodiff.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace leftnet::ad {

namespace detail {
void no_active_tape(const char* op) {
  throw std::logic_error(std::string("autodiff: '") + op + "' on a variable with no active tape");
}
}  // namespace detail

void Tape::grow(std::size_t n) {
  const std::size_t want = std::max(count_ + n, std::max<std::size_t>(1024, 2 * parents_.size()));
  parents_.resize(want);
  partials_.resize(want);
}

namespace {
inline double weight_value(const Var& w) { return w.v; }
inline double weight_value(double w) { return w; }
}  // namespace

template <class W>
void Tape::push_block(const W* w, const W* b, const Var* x, int in, int out, Var* y) {
  LinearBlock block;
  block.first = static_cast<std::int32_t>(size());
  block.last = block.first + out - 1;
  if constexpr (std::is_same_v<W, Var>) {
    block.w = w;
  } else {
    block.w_plain = w;
  }
  block.in = in;
  block.inputs = block_inputs_.size();
  thread_local std::vector<double> xv;
  xv.resize(static_cast<std::size_t>(in));
  for (int i = 0; i < in; ++i) {
    block_inputs_.push_back(x[i].id);
    xv[static_cast<std::size_t>(i)] = x[i].v;
  }
  for (int o = 0; o < out; ++o) {
    const W* row = w + static_cast<std::ptrdiff_t>(o) * in;
    double acc = b != nullptr ? weight_value(b[o]) : 0.0;
    for (int i = 0; i < in; ++i) acc += weight_value(row[i]) * xv[static_cast<std::size_t>(i)];
    offsets_.push_back(static_cast<std::uint32_t>(count_));
    y[o] = Var(acc, static_cast<std::int32_t>(offsets_.size() - 2));
  }
  blocks_.push_back(block);
}

void Tape::linear_block(const Var* w, const Var* b, const Var* x, int in, int out, Var* y) {
  push_block(w, b, x, in, out, y);
}

void Tape::linear_block(const double* w, const double* b, const Var* x, int in, int out, Var* y) {
  push_block(w, b, x, in, out, y);
}

std::vector<double> Tape::adjoints(const Var& root) const {
  std::vector<double> adj(size(), 0.0);
  if (root.is_constant()) return adj;
  adj[static_cast<std::size_t>(root.id)] = 1.0;
  const std::int32_t* parents = parents_.data();
  const double* partials = partials_.data();
  std::vector<double> scratch;
  std::ptrdiff_t next_block = static_cast<std::ptrdiff_t>(blocks_.size()) - 1;
  while (next_block >= 0 && blocks_[static_cast<std::size_t>(next_block)].first > root.id) --next_block;
  for (std::size_t node = static_cast<std::size_t>(root.id) + 1; node-- > 0;) {
    if (next_block >= 0) {
      const LinearBlock& blk = blocks_[static_cast<std::size_t>(next_block)];
      // Every consumer of a block output comes after the whole block, so
      // the outputs' adjoints are final once the sweep reaches it.
      if (static_cast<std::int32_t>(node) == std::min(blk.last, root.id)) {
        const std::int32_t* in_ids = block_inputs_.data() + blk.inputs;
        scratch.assign(static_cast<std::size_t>(blk.in), 0.0);
        for (std::int32_t o = 0; o <= blk.last - blk.first; ++o) {
          const double a = adj[static_cast<std::size_t>(blk.first + o)];
          if (a == 0.0) continue;
          const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(o) * blk.in;
          if (blk.w_plain != nullptr) {
            const double* row = blk.w_plain + off;
            for (int i = 0; i < blk.in; ++i) scratch[static_cast<std::size_t>(i)] += a * row[i];
          } else {
            const Var* row = blk.w + off;
            for (int i = 0; i < blk.in; ++i) scratch[static_cast<std::size_t>(i)] += a * row[i].v;
          }
        }
        for (int i = 0; i < blk.in; ++i) {
          if (in_ids[i] >= 0) adj[static_cast<std::size_t>(in_ids[i])] += scratch[static_cast<std::size_t>(i)];
        }
        --next_block;
      }
    }
    const double a = adj[node];
    if (a == 0.0) continue;
    const std::uint32_t end = offsets_[node + 1];
    for (std::uint32_t k = offsets_[node]; k < end; ++k) {
      adj[static_cast<std::size_t>(parents[k])] += a * partials[k];
    }
  }
  return adj;
}

void Tape::clear() {
  offsets_.resize(1);
  count_ = 0;
  blocks_.clear();
  block_inputs_.clear();
}

void dense(const double* w, const double* b, const double* x, int in, int out, double* y) {
  for (int o = 0; o < out; ++o) {
    const double* row = w + static_cast<std::ptrdiff_t>(o) * in;
    double acc = b ? b[o] : 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void dense(const Var* w, const Var* b, const Var* x, int in, int out, Var* y) {
  Tape* tape = detail::active;
  const auto n_w = static_cast<std::ptrdiff_t>(in) * out;
  const bool constant_weights =
      std::all_of(w, w + n_w, [](const Var& v) { return v.is_constant(); }) &&
      (b == nullptr || std::all_of(b, b + out, [](const Var& v) { return v.is_constant(); }));
  if (constant_weights && std::any_of(x, x + in, [](const Var& v) { return !v.is_constant(); })) {
    if (tape == nullptr) detail::no_active_tape("dense");
    tape->linear_block(w, b, x, in, out, y);
    return;
  }
  for (int o = 0; o < out; ++o) {
    const Var* row = w + static_cast<std::ptrdiff_t>(o) * in;
    double acc = b ? b[o].v : 0.0;
    bool any = b && !b[o].is_constant();
    for (int i = 0; i < in; ++i) {
      acc += row[i].v * x[i].v;
      any = any || !row[i].is_constant() || !x[i].is_constant();
    }
    if (!any) {
      y[o] = Var(acc);
      continue;
    }
    if (tape == nullptr) detail::no_active_tape("dense");
    tape->reserve_parents(2 * static_cast<std::size_t>(in) + 1);
    if (b && !b[o].is_constant()) tape->add_parent_unchecked(b[o].id, 1.0);
    for (int i = 0; i < in; ++i) {
      if (!row[i].is_constant() && x[i].v != 0.0) tape->add_parent_unchecked(row[i].id, x[i].v);
      if (!x[i].is_constant() && row[i].v != 0.0) tape->add_parent_unchecked(x[i].id, row[i].v);
    }
    y[o] = tape->end_node(acc);
  }
}

void dense(const double* w, const double* b, const Var* x, int in, int out, Var* y) {
  if (std::all_of(x, x + in, [](const Var& v) { return v.is_constant(); })) {
    thread_local std::vector<double> xv;
    xv.resize(static_cast<std::size_t>(in));
    for (int i = 0; i < in; ++i) xv[static_cast<std::size_t>(i)] = x[i].v;
    for (int o = 0; o < out; ++o) {
      const double* row = w + static_cast<std::ptrdiff_t>(o) * in;
      double acc = b ? b[o] : 0.0;
      for (int i = 0; i < in; ++i) acc += row[i] * xv[static_cast<std::size_t>(i)];
      y[o] = Var(acc);
    }
    return;
  }
  Tape* tape = detail::active;
  if (tape == nullptr) detail::no_active_tape("dense");
  tape->linear_block(w, b, x, in, out, y);
}

void dense(const Dual<Var>* w, const Dual<Var>* b, const Dual<Var>* x, int in, int out,
           Dual<Var>* y) {
  Tape* tape = detail::active;
  const auto n = static_cast<std::size_t>(in);
  for (int o = 0; o < out; ++o) {
    const Dual<Var>* row = w + static_cast<std::ptrdiff_t>(o) * in;
    // Value: b.v + sum w.v x.v
    double acc = b ? b[o].v.v : 0.0;
    bool any = b && !b[o].v.is_constant();
    for (int i = 0; i < in; ++i) {
      acc += row[i].v.v * x[i].v.v;
      any = any || !row[i].v.is_constant() || !x[i].v.is_constant();
    }
    Var value(acc);
    if (any) {
      if (tape == nullptr) detail::no_active_tape("dense");
      tape->reserve_parents(2 * n + 1);
      if (b && !b[o].v.is_constant()) tape->add_parent_unchecked(b[o].v.id, 1.0);
      for (int i = 0; i < in; ++i) {
        const Var& wv = row[i].v;
        const Var& xv = x[i].v;
        if (!wv.is_constant() && xv.v != 0.0) tape->add_parent_unchecked(wv.id, xv.v);
        if (!xv.is_constant() && wv.v != 0.0) tape->add_parent_unchecked(xv.id, wv.v);
      }
      value = tape->end_node(acc);
    }
    // Tangent: b.t + sum (w.v x.t + w.t x.v)
    double tacc = b ? b[o].t.v : 0.0;
    bool tany = b && !b[o].t.is_constant();
    for (int i = 0; i < in; ++i) {
      tacc += row[i].v.v * x[i].t.v + row[i].t.v * x[i].v.v;
      tany = tany || !x[i].t.is_constant() || !row[i].t.is_constant() ||
             (x[i].t.v != 0.0 && !row[i].v.is_constant()) ||
             (row[i].t.v != 0.0 && !x[i].v.is_constant());
    }
    Var tangent(tacc);
    if (tany) {
      if (tape == nullptr) detail::no_active_tape("dense");
      tape->reserve_parents(4 * n + 1);
      if (b && !b[o].t.is_constant()) tape->add_parent_unchecked(b[o].t.id, 1.0);
      for (int i = 0; i < in; ++i) {
        const Var& wv = row[i].v;
        const Var& wt = row[i].t;
        const Var& xv = x[i].v;
        const Var& xt = x[i].t;
        if (!wv.is_constant() && xt.v != 0.0) tape->add_parent_unchecked(wv.id, xt.v);
        if (!xt.is_constant() && wv.v != 0.0) tape->add_parent_unchecked(xt.id, wv.v);
        if (!wt.is_constant() && xv.v != 0.0) tape->add_parent_unchecked(wt.id, xv.v);
        if (!xv.is_constant() && wt.v != 0.0) tape->add_parent_unchecked(xv.id, wt.v);
      }
      tangent = tape->end_node(tacc);
    }
    y[o] = Dual<Var>(value, tangent);
  }
}

std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> x, double eps) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + eps;
    const double up = f(probe);
    probe[k] = x[k] - eps;
    const double down = f(probe);
    probe[k] = x[k];
    grad[k] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_error: size mismatch");
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    ref += b[k] * b[k];
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), floor);
}

}  // namespace leftnet::ad
