// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/model.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace leftnet {

void ModelConfig::validate() const {
  if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (use_fte && vector_channels < 1) throw ConfigError("vector_channels must be >= 1");
  if (num_rbf < 1) throw ConfigError("num_rbf must be >= 1");
  if (!(cutoff > 0.0)) throw ConfigError("cutoff must be positive");
  if (rbf_gamma < 0.0) throw ConfigError("rbf_gamma must be >= 0");
  if (!std::isfinite(energy_scale) || energy_scale == 0.0) throw ConfigError("energy_scale must be finite and nonzero");
  if (!std::isfinite(energy_shift)) throw ConfigError("energy_shift must be finite");
}

// ---------------------------------------------------------------------------
// Layout and initialization
// ---------------------------------------------------------------------------

namespace {

class LayoutBuilder {
 public:
  std::size_t block(const std::string& name, std::size_t size) {
    layout_.blocks.push_back({name, layout_.total, size});
    layout_.total += size;
    return layout_.blocks.back().offset;
  }

  DenseSpec dense(const std::string& name, int in, int out, bool bias = true) {
    DenseSpec s;
    s.in = in;
    s.out = out;
    s.weight = block(name + ".weight", static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
    if (bias) s.bias = block(name + ".bias", static_cast<std::size_t>(out));
    return s;
  }

  MlpSpec mlp(const std::string& name, int in, int hidden, int out) {
    MlpSpec s;
    s.first = dense(name + ".0", in, hidden);
    s.second = dense(name + ".1", hidden, out);
    return s;
  }

  ParamLayout& layout() { return layout_; }

 private:
  ParamLayout layout_;
};

}  // namespace

ParamLayout make_layout(const ModelConfig& config) {
  config.validate();
  const int d = config.hidden_dim;
  const int r = config.num_rbf;
  const int c = config.fte_channels();
  const int k = config.tensor_channels();
  LayoutBuilder b;
  b.layout().embedding = b.block("embedding", static_cast<std::size_t>(kNumElements + 1) * d);
  if (config.use_fte) b.layout().edge_init = b.mlp("edge_init", 2 * d + r, d, 2 * c);
  const int update_in = 2 * d + 3 * c + 9 * k;
  for (int l = 0; l < config.num_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    LayerSpec s;
    if (config.use_lse) {
      s.lse_mlp = b.mlp(p + "lse_mlp", 3, d, d);
      s.lse_radial = b.dense(p + "lse_radial", r, d, false);
      s.lse_combine = b.dense(p + "lse_combine", d + r, d);
    }
    s.message = b.mlp(p + "message", 2 * d + r, d, d + 4 * c + k);
    s.update_h = b.mlp(p + "update_h", update_in, d, d);
    if (config.use_fte) {
      s.update_v = b.mlp(p + "update_v", update_in, d, 3 * c);
      s.vector_skip = b.dense(p + "vector_skip", 3 * c, 3 * c, false);
    }
    if (k > 0) s.update_t = b.mlp(p + "update_t", update_in, d, 9 * k);
    b.layout().layers.push_back(s);
  }
  b.layout().readout = b.mlp("readout", d, d, 1);
  return b.layout();
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p;
  p.config = config;
  p.layout = make_layout(config);
  p.values.assign(p.layout.total, 0.0);
  std::mt19937_64 rng(seed);
  auto fill_dense = [&](const DenseSpec& s) {
    if (s.in == 0) return;
    const double bound = std::sqrt(3.0 / s.in);
    std::uniform_real_distribution<double> u(-bound, bound);
    const std::size_t n = static_cast<std::size_t>(s.in) * static_cast<std::size_t>(s.out);
    for (std::size_t q = 0; q < n; ++q) p.values[s.weight + q] = u(rng);
  };
  auto fill_mlp = [&](const MlpSpec& s) {
    fill_dense(s.first);
    fill_dense(s.second);
  };
  {
    std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
    const std::size_t n = static_cast<std::size_t>(kNumElements + 1) * config.hidden_dim;
    for (std::size_t q = 0; q < n; ++q) p.values[p.layout.embedding + q] = u(rng);
  }
  fill_mlp(p.layout.edge_init);
  for (const auto& l : p.layout.layers) {
    fill_mlp(l.lse_mlp);
    fill_dense(l.lse_radial);
    fill_dense(l.lse_combine);
    fill_mlp(l.message);
    fill_mlp(l.update_h);
    fill_mlp(l.update_v);
    fill_dense(l.vector_skip);
    fill_mlp(l.update_t);
  }
  fill_mlp(p.layout.readout);
  return p;
}

// ---------------------------------------------------------------------------
// Shared kernels
// ---------------------------------------------------------------------------

namespace {

template <class T, class P>
void apply_dense(const DenseSpec& s, const P* p, const T* x, T* y) {
  ad::dense(p + s.weight, s.bias == kNoBias ? nullptr : p + s.bias, x, s.in, s.out, y);
}

template <class T, class P>
std::vector<T> apply_mlp(const MlpSpec& s, const P* p, const T* x) {
  using ad::silu;
  std::vector<T> hidden(static_cast<std::size_t>(s.first.out));
  apply_dense(s.first, p, x, hidden.data());
  for (auto& z : hidden) z = silu(z);
  std::vector<T> out(static_cast<std::size_t>(s.second.out));
  apply_dense(s.second, p, hidden.data(), out.data());
  return out;
}

template <class T>
struct MessageT {
  std::vector<T> scalar;
  std::vector<Vec3T<T>> vectors;
  std::vector<Mat3T<T>> tensors;
};

template <class T>
struct NodeStateT {
  std::vector<T> h;
  std::vector<Vec3T<T>> v;
  std::vector<Mat3T<T>> tensors;
};

/// The per-layer operations, parameterized by activation and parameter type.
template <class T, class P = T>
class Kernels {
 public:
  Kernels(const ModelConfig& config, const ParamLayout& layout, const P* params)
      : cfg_(config),
        layout_(layout),
        p_(params),
        d_(config.hidden_dim),
        c_(config.fte_channels()),
        k_(config.tensor_channels()),
        r_(config.num_rbf) {}

  int d() const { return d_; }
  int c() const { return c_; }
  int k() const { return k_; }
  int r() const { return r_; }

  std::vector<T> radial(int layer, const T* rbf) const {
    std::vector<T> out(static_cast<std::size_t>(d_));
    apply_dense(layout_.layers[static_cast<std::size_t>(layer)].lse_radial, p_, rbf, out.data());
    return out;
  }

  /// A_ij from member positions and their (already projected) radial weights.
  /// A null frame pools nothing.
  std::vector<T> lse(int layer, const FrameT<T>* frame, std::span<const Vec3T<T>> members,
                     std::span<const std::vector<T>* const> member_radial, const T* rbf_ij) const {
    const LayerSpec& s = layout_.layers[static_cast<std::size_t>(layer)];
    const auto d = static_cast<std::size_t>(d_);
    std::vector<T> input(d + static_cast<std::size_t>(r_), T(0.0));
    if (frame != nullptr && !members.empty()) {
      const double inv = 1.0 / static_cast<double>(members.size());
      for (std::size_t m = 0; m < members.size(); ++m) {
        const auto t = scalarize(members[m], *frame, cfg_.mode);
        const std::vector<T> enc = apply_mlp(s.lse_mlp, p_, t.data());
        const std::vector<T>& rho = *member_radial[m];
        for (std::size_t q = 0; q < d; ++q) input[q] += rho[q] * enc[q] * inv;
      }
    }
    for (std::size_t q = 0; q < static_cast<std::size_t>(r_); ++q) input[d + q] = rbf_ij[q];
    std::vector<T> a(d);
    apply_dense(s.lse_combine, p_, input.data(), a.data());
    return a;
  }

  /// Raw message-MLP output on [h_i, A * h_j, rbf].
  std::vector<T> message_mlp(int layer, const T* h_i, const T* h_j, const T* a_ij,
                             const T* rbf) const {
    const auto d = static_cast<std::size_t>(d_);
    std::vector<T> z(2 * d + static_cast<std::size_t>(r_));
    for (std::size_t q = 0; q < d; ++q) {
      z[q] = h_i[q];
      z[d + q] = a_ij ? a_ij[q] * h_j[q] : h_j[q];
    }
    for (std::size_t q = 0; q < static_cast<std::size_t>(r_); ++q) z[2 * d + q] = rbf[q];
    return apply_mlp(layout_.layers[static_cast<std::size_t>(layer)].message, p_, z.data());
  }

  /// Message for one edge. `e_ij` holds the C edge vector features; `t_j`
  /// the K tensor features of the sender. Null frame drops frame terms.
  MessageT<T> message(int layer, const T* h_i, const T* h_j, const T* a_ij, const T* rbf,
                      const T& fcut, std::span<const Vec3T<T>> e_ij,
                      std::span<const Mat3T<T>> t_j, const FrameT<T>* frame) const {
    const std::vector<T> out = message_mlp(layer, h_i, h_j, a_ij, rbf);
    const auto d = static_cast<std::size_t>(d_);
    const auto c = static_cast<std::size_t>(c_);
    MessageT<T> m;
    m.scalar.resize(d);
    for (std::size_t q = 0; q < d; ++q) m.scalar[q] = out[q] * fcut;
    m.vectors.resize(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
      Vec3T<T> mu = e_ij[ch] * out[d + ch];
      if (frame != nullptr) {
        const std::size_t g = d + c + 3 * ch;
        mu += frame->e1 * out[g];
        if (cfg_.mode == ScalarMode::kSE3) mu += frame->e2 * out[g + 1];
        mu += frame->e3 * out[g + 2];
      }
      m.vectors[ch] = mu * fcut;
    }
    m.tensors.resize(static_cast<std::size_t>(k_));
    for (std::size_t ch = 0; ch < static_cast<std::size_t>(k_); ++ch) {
      const T gate = out[d + 4 * c + ch] * fcut;
      m.tensors[ch] = t_j[ch] * gate + outer(m.vectors[ch], m.vectors[ch]);
    }
    return m;
  }

  NodeStateT<T> update(int layer, const MessageT<T>& m, const T* h, const FrameT<T>* frame,
                       std::span<const Vec3T<T>> prev_v, std::span<const Mat3T<T>> prev_t) const {
    const LayerSpec& s = layout_.layers[static_cast<std::size_t>(layer)];
    const auto d = static_cast<std::size_t>(d_);
    const auto c = static_cast<std::size_t>(c_);
    const auto k = static_cast<std::size_t>(k_);
    std::vector<T> u(2 * d + 3 * c + 9 * k, T(0.0));
    for (std::size_t q = 0; q < d; ++q) {
      u[q] = h[q];
      u[d + q] = m.scalar[q];
    }
    const std::size_t t_off = 2 * d;
    const std::size_t tt_off = t_off + 3 * c;
    if (frame != nullptr) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const auto t = scalarize(m.vectors[ch], *frame, cfg_.mode);
        for (std::size_t a = 0; a < 3; ++a) u[t_off + 3 * ch + a] = t[a];
      }
      for (std::size_t ch = 0; ch < k; ++ch) {
        const Mat3T<T> coeff = scalarize_rank2(m.tensors[ch], *frame, cfg_.mode);
        for (std::size_t a = 0; a < 9; ++a) u[tt_off + 9 * ch + a] = coeff.m[a];
      }
    }
    NodeStateT<T> out;
    const std::vector<T> dh = apply_mlp(s.update_h, p_, u.data());
    out.h.resize(d);
    for (std::size_t q = 0; q < d; ++q) out.h[q] = h[q] + dh[q];

    if (c > 0) {
      if (frame == nullptr) {
        out.v.assign(prev_v.begin(), prev_v.end());
        out.v.resize(c);
      } else {
        std::vector<T> coeff = apply_mlp(s.update_v, p_, u.data());
        std::vector<T> skip(3 * c);
        apply_dense(s.vector_skip, p_, u.data() + t_off, skip.data());
        out.v.resize(c);
        for (std::size_t ch = 0; ch < c; ++ch) {
          std::array<T, 3> t{coeff[3 * ch] + skip[3 * ch], coeff[3 * ch + 1] + skip[3 * ch + 1],
                             coeff[3 * ch + 2] + skip[3 * ch + 2]};
          if (cfg_.mode == ScalarMode::kE3) t[1] = T(0.0);
          out.v[ch] = tensorize(t, *frame);
        }
      }
    }
    if (k > 0) {
      if (frame == nullptr) {
        out.tensors.assign(prev_t.begin(), prev_t.end());
        out.tensors.resize(k);
      } else {
        const std::vector<T> coeff = apply_mlp(s.update_t, p_, u.data());
        out.tensors.resize(k);
        for (std::size_t ch = 0; ch < k; ++ch) {
          Mat3T<T> cm;
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              const bool odd = (a == 1) != (b == 1);
              cm(a, b) = (cfg_.mode == ScalarMode::kE3 && odd)
                             ? T(0.0)
                             : coeff[9 * ch + static_cast<std::size_t>(3 * a + b)];
            }
          }
          out.tensors[ch] = tensorize_rank2(cm, *frame);
        }
      }
    }
    return out;
  }

 private:
  const ModelConfig& cfg_;
  const ParamLayout& layout_;
  const P* p_;
  int d_;
  int c_;
  int k_;
  int r_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

template <class T, class P>
ForwardResult<T> forward_impl(const ModelConfig& config, const ParamLayout& layout,
                              std::span<const P> params, std::span<const Vec3T<T>> positions,
                              std::span<const int> atomic_numbers, const Topology& topo,
                              const ForwardOptions& options) {
  const int n = static_cast<int>(positions.size());
  if (n == 0) throw EmptyGraph("forward: graph has no nodes");
  if (topo.num_nodes != n || atomic_numbers.size() != positions.size()) {
    throw std::invalid_argument("forward: positions, atomic numbers and topology disagree");
  }
  if (params.size() != layout.total) throw std::invalid_argument("forward: parameter count mismatch");
  const Kernels<T, P> kern(config, layout, params.data());
  const auto un = static_cast<std::size_t>(n);
  const auto d = static_cast<std::size_t>(kern.d());
  const auto c = static_cast<std::size_t>(kern.c());
  const auto k = static_cast<std::size_t>(kern.k());
  const auto r = static_cast<std::size_t>(kern.r());
  const RbfConfig rbf_cfg = config.rbf();
  const std::size_t ne = topo.edges.size();

  // Centralize.
  Vec3T<T> mean = positions[0];
  for (std::size_t i = 1; i < un; ++i) mean += positions[i];
  mean = mean / T(static_cast<double>(n));
  std::vector<Vec3T<T>> x(un);
  for (std::size_t i = 0; i < un; ++i) x[i] = positions[i] - mean;

  ForwardResult<T> res;

  // With a readout node only its receptive field is computed; other nodes
  // are left with partially updated states.
  std::vector<std::vector<char>> active;
  if (options.readout_node >= 0) {
    if (options.readout_node >= n) throw std::out_of_range("forward: readout_node out of range");
    const auto layers = static_cast<std::size_t>(config.num_layers);
    active.assign(layers, std::vector<char>(un, 0));
    active[layers - 1][static_cast<std::size_t>(options.readout_node)] = 1;
    for (std::size_t l = layers - 1; l-- > 0;) {
      active[l] = active[l + 1];
      for (std::size_t i = 0; i < un; ++i) {
        if (!active[l + 1][i]) continue;
        for (int j : topo.neighbors[i]) active[l][static_cast<std::size_t>(j)] = 1;
      }
    }
  }
  auto is_active = [&](int layer, std::size_t i) {
    return active.empty() || active[static_cast<std::size_t>(layer)][i];
  };

  // Edge geometry.
  std::vector<T> rbf(ne * r);
  std::vector<T> fcut(ne);
  std::vector<std::optional<FrameT<T>>> edge_frames(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto [i, j] = topo.edges[e];
    const Vec3T<T> diff = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
    if (norm(value_of(diff)) <= kDegenerateEps) {
      throw DegenerateGeometry("forward: coincident atoms on edge " + std::to_string(e),
                               DegenerateGeometry::Site::kEdge, static_cast<std::ptrdiff_t>(e));
    }
    const T dist = norm(diff);
    rbf_embed(dist, rbf_cfg, rbf.data() + e * r);
    fcut[e] = cosine_cutoff(dist, config.cutoff);
    if (config.use_lse || config.use_fte) {
      edge_frames[e] = try_edge_frame(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
      if (!edge_frames[e]) {
        if (options.strict) {
          throw DegenerateGeometry("forward: degenerate edge frame on edge " + std::to_string(e),
                                   DegenerateGeometry::Site::kEdge, static_cast<std::ptrdiff_t>(e));
        }
        ++res.degenerate_edges;
      }
    }
  }

  // Node frames.
  std::vector<std::optional<FrameT<T>>> node_frames(un);
  if (config.use_fte) {
    std::vector<Vec3T<T>> nb;
    for (std::size_t i = 0; i < un; ++i) {
      const auto& neighbors = topo.neighbors[i];
      if (neighbors.empty()) continue;
      nb.clear();
      for (int j : neighbors) nb.push_back(x[static_cast<std::size_t>(j)]);
      node_frames[i] = try_node_frame(x[i], std::span<const Vec3T<T>>(nb));
      if (!node_frames[i]) {
        if (options.strict) {
          throw DegenerateGeometry("forward: degenerate node frame at node " + std::to_string(i),
                                   DegenerateGeometry::Site::kNode, static_cast<std::ptrdiff_t>(i));
        }
        ++res.degenerate_nodes;
      }
    }
  }

  // Initial features.
  res.h.assign(un, std::vector<T>(d));
  for (std::size_t i = 0; i < un; ++i) {
    const int z = atomic_numbers[i];
    if (z < 0 || z > kNumElements) throw std::invalid_argument("forward: atomic number out of range");
    const P* row = params.data() + layout.embedding + static_cast<std::size_t>(z) * d;
    for (std::size_t q = 0; q < d; ++q) res.h[i][q] = T(row[q]);
  }
  res.v.assign(un, std::vector<Vec3T<T>>(c, Vec3T<T>(T(0.0), T(0.0), T(0.0))));
  res.tensors.assign(un, std::vector<Mat3T<T>>(k));

  // Edge vector features for the first layer: frame vectors gated by the
  // endpoint features.
  std::vector<std::vector<Vec3T<T>>> e0(ne, std::vector<Vec3T<T>>(c, Vec3T<T>(T(0.0), T(0.0), T(0.0))));
  if (config.use_fte) {
    std::vector<T> z(2 * d + r);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto [i, j] = topo.edges[e];
      if (!edge_frames[e] || !is_active(0, static_cast<std::size_t>(i))) continue;
      for (std::size_t q = 0; q < d; ++q) {
        z[q] = res.h[static_cast<std::size_t>(i)][q];
        z[d + q] = res.h[static_cast<std::size_t>(j)][q];
      }
      for (std::size_t q = 0; q < r; ++q) z[2 * d + q] = rbf[e * r + q];
      const std::vector<T> g = apply_mlp(layout.edge_init, params.data(), z.data());
      const FrameT<T>& f = *edge_frames[e];
      const Vec3T<T>& second = config.mode == ScalarMode::kSE3 ? f.e2 : f.e3;
      for (std::size_t ch = 0; ch < c; ++ch) {
        e0[e][ch] = (f.e1 * g[2 * ch] + second * g[2 * ch + 1]) * fcut[e];
      }
    }
  }

  std::vector<T> rbf_zero(r);
  rbf_embed(T(0.0), rbf_cfg, rbf_zero.data());
  std::vector<Vec3T<T>> member_pos;
  std::vector<const std::vector<T>*> member_radial;
  std::vector<Vec3T<T>> e_ij(c);

  for (int layer = 0; layer < config.num_layers; ++layer) {
    std::vector<std::vector<T>> radial_edge;
    std::vector<T> radial_self;
    if (config.use_lse) {
      radial_self = kern.radial(layer, rbf_zero.data());
      radial_edge.resize(ne);
      for (std::size_t e = 0; e < ne; ++e) radial_edge[e] = kern.radial(layer, rbf.data() + e * r);
    }

    std::vector<MessageT<T>> agg(un);
    for (auto& m : agg) {
      m.scalar.assign(d, T(0.0));
      m.vectors.assign(c, Vec3T<T>(T(0.0), T(0.0), T(0.0)));
      m.tensors.assign(k, Mat3T<T>());
    }

    for (std::size_t e = 0; e < ne; ++e) {
      const auto [i, j] = topo.edges[e];
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (!is_active(layer, ui)) continue;
      const FrameT<T>* frame = edge_frames[e] ? &*edge_frames[e] : nullptr;
      std::vector<T> a;
      if (config.use_lse) {
        member_pos.clear();
        member_radial.clear();
        member_pos.push_back(x[ui]);
        member_radial.push_back(&radial_self);
        member_pos.push_back(x[uj]);
        member_radial.push_back(&radial_edge[e]);
        for (std::size_t m = 0; m < topo.common[e].size(); ++m) {
          member_pos.push_back(x[static_cast<std::size_t>(topo.common[e][m])]);
          member_radial.push_back(&radial_edge[static_cast<std::size_t>(topo.common_edge[e][m])]);
        }
        a = kern.lse(layer, frame, member_pos, member_radial, rbf.data() + e * r);
      }
      for (std::size_t ch = 0; ch < c; ++ch) {
        e_ij[ch] = layer == 0 ? res.v[uj][ch] + e0[e][ch] : res.v[uj][ch];
      }
      const MessageT<T> msg =
          kern.message(layer, res.h[ui].data(), res.h[uj].data(), config.use_lse ? a.data() : nullptr,
                       rbf.data() + e * r, fcut[e], e_ij, res.tensors[uj], frame);
      MessageT<T>& acc = agg[ui];
      for (std::size_t q = 0; q < d; ++q) acc.scalar[q] += msg.scalar[q];
      for (std::size_t ch = 0; ch < c; ++ch) acc.vectors[ch] += msg.vectors[ch];
      for (std::size_t ch = 0; ch < k; ++ch) acc.tensors[ch] += msg.tensors[ch];
    }

    for (std::size_t i = 0; i < un; ++i) {
      if (!is_active(layer, i)) continue;
      const FrameT<T>* frame = node_frames[i] ? &*node_frames[i] : nullptr;
      NodeStateT<T> s = kern.update(layer, agg[i], res.h[i].data(), frame, res.v[i], res.tensors[i]);
      res.h[i] = std::move(s.h);
      if (c > 0) res.v[i] = std::move(s.v);
      if (k > 0) res.tensors[i] = std::move(s.tensors);
    }
  }

  res.pooled.assign(d, T(0.0));
  if (options.readout_node >= 0) {
    res.pooled = res.h[static_cast<std::size_t>(options.readout_node)];
  } else {
    for (std::size_t i = 0; i < un; ++i) {
      for (std::size_t q = 0; q < d; ++q) res.pooled[q] += res.h[i][q];
    }
  }
  if (config.readout == Readout::kMean && options.readout_node < 0) {
    for (auto& z : res.pooled) z = z / T(static_cast<double>(n));
  }
  res.graph_scalar = apply_mlp(layout.readout, params.data(), res.pooled.data())[0];
  res.energy = res.graph_scalar * config.energy_scale + config.energy_shift * static_cast<double>(n);
  return res;
}

}  // namespace

template <class T>
ForwardResult<T> forward(const ModelConfig& config, const ParamLayout& layout,
                         std::span<const T> params, std::span<const Vec3T<T>> positions,
                         std::span<const int> atomic_numbers, const Topology& topo,
                         const ForwardOptions& options) {
  return forward_impl<T, T>(config, layout, params, positions, atomic_numbers, topo, options);
}

template ForwardResult<double> forward(const ModelConfig&, const ParamLayout&, std::span<const double>,
                                       std::span<const Vec3T<double>>, std::span<const int>,
                                       const Topology&, const ForwardOptions&);
template ForwardResult<ad::Var> forward(const ModelConfig&, const ParamLayout&,
                                        std::span<const ad::Var>, std::span<const Vec3T<ad::Var>>,
                                        std::span<const int>, const Topology&, const ForwardOptions&);
template ForwardResult<ad::Dual<double>> forward(const ModelConfig&, const ParamLayout&,
                                                 std::span<const ad::Dual<double>>,
                                                 std::span<const Vec3T<ad::Dual<double>>>,
                                                 std::span<const int>, const Topology&,
                                                 const ForwardOptions&);
template ForwardResult<ad::Dual<ad::Var>> forward(const ModelConfig&, const ParamLayout&,
                                                  std::span<const ad::Dual<ad::Var>>,
                                                  std::span<const Vec3T<ad::Dual<ad::Var>>>,
                                                  std::span<const int>, const Topology&,
                                                  const ForwardOptions&);

ForwardResult<double> forward(const GeometricGraph& graph, const ModelParams& params,
                              const ForwardOptions& options) {
  const Topology topo = build_topology(graph);
  return forward<double>(params.config, params.layout, params.values, graph.positions,
                         graph.atomic_numbers, topo, options);
}

EnergyForces energy_and_forces(const GeometricGraph& graph, const Topology& topo,
                               const ModelParams& params, const ForwardOptions& options) {
  thread_local ad::Tape tape;
  tape.clear();
  ad::TapeScope scope(tape);
  std::vector<Vec3T<ad::Var>> pos;
  pos.reserve(graph.positions.size());
  for (const auto& p : graph.positions) {
    pos.emplace_back(tape.variable(p.x), tape.variable(p.y), tape.variable(p.z));
  }
  // Parameters stay plain doubles: only positions are on the tape.
  const ForwardResult<ad::Var> res = forward_impl<ad::Var, double>(
      params.config, params.layout, std::span<const double>(params.values), pos, graph.atomic_numbers,
      topo, options);
  const std::vector<double> adj = tape.adjoints(res.energy);
  EnergyForces out;
  out.energy = res.energy.v;
  out.forces.reserve(pos.size());
  auto grad = [&](const ad::Var& v) { return v.is_constant() ? 0.0 : adj[static_cast<std::size_t>(v.id)]; };
  for (const auto& p : pos) out.forces.push_back({-grad(p.x), -grad(p.y), -grad(p.z)});
  return out;
}

EnergyForces energy_and_forces(const GeometricGraph& graph, const ModelParams& params,
                               const ForwardOptions& options) {
  return energy_and_forces(graph, build_topology(graph), params, options);
}

// ---------------------------------------------------------------------------
// Standalone stages
// ---------------------------------------------------------------------------

namespace {

void check_layer(const ModelParams& params, int layer) {
  if (layer < 0 || layer >= params.config.num_layers) throw std::out_of_range("layer index out of range");
}

Message to_message(MessageT<double> m) {
  return {std::move(m.scalar), std::move(m.vectors), std::move(m.tensors)};
}

}  // namespace

std::vector<double> lse_weights(const ModelParams& params, int layer, const Substructure& sub,
                                const Frame& f_ij) {
  check_layer(params, layer);
  if (!params.config.use_lse) throw std::invalid_argument("lse_weights: model has no LSE blocks");
  if (sub.member_positions.size() < 2) throw std::invalid_argument("lse_weights: substructure needs both endpoints");
  const Kernels<double> kern(params.config, params.layout, params.values.data());
  const RbfConfig rc = params.config.rbf();
  const Vec3& xi = sub.member_positions[0];
  std::vector<std::vector<double>> radials;
  radials.reserve(sub.member_positions.size());
  for (const auto& xk : sub.member_positions) {
    const std::vector<double> rb = rbf_embed(norm(xk - xi), rc);
    radials.push_back(kern.radial(layer, rb.data()));
  }
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& rad : radials) ptrs.push_back(&rad);
  const std::vector<double> rbf_ij = rbf_embed(norm(sub.member_positions[1] - xi), rc);
  return kern.lse(layer, &f_ij, sub.member_positions, ptrs, rbf_ij.data());
}

std::vector<double> invariant_message(const ModelParams& params, int layer,
                                      std::span<const double> h_i, std::span<const double> h_j,
                                      std::span<const double> a_ij, double d_ij) {
  check_layer(params, layer);
  const Kernels<double> kern(params.config, params.layout, params.values.data());
  const std::vector<double> rb = rbf_embed(d_ij, params.config.rbf());
  std::vector<double> out = kern.message_mlp(layer, h_i.data(), h_j.data(),
                                             a_ij.empty() ? nullptr : a_ij.data(), rb.data());
  out.resize(static_cast<std::size_t>(kern.d()));
  const double fc = cosine_cutoff(d_ij, params.config.cutoff);
  for (auto& z : out) z *= fc;
  return out;
}

Message equivariant_message(const ModelParams& params, int layer, std::span<const double> h_i,
                            std::span<const double> h_j, std::span<const double> a_ij,
                            double d_ij, std::span<const Vec3> e_ij,
                            std::span<const Mat3> t_j, const Frame* f_ij) {
  check_layer(params, layer);
  const Kernels<double> kern(params.config, params.layout, params.values.data());
  if (e_ij.size() != static_cast<std::size_t>(kern.c()) || t_j.size() != static_cast<std::size_t>(kern.k())) {
    throw std::invalid_argument("equivariant_message: channel count mismatch");
  }
  const std::vector<double> rb = rbf_embed(d_ij, params.config.rbf());
  return to_message(kern.message(layer, h_i.data(), h_j.data(), a_ij.empty() ? nullptr : a_ij.data(),
                                 rb.data(), cosine_cutoff(d_ij, params.config.cutoff), e_ij, t_j,
                                 f_ij));
}

Message aggregate(std::span<const Message> messages, int d, int c, int k) {
  Message out;
  out.scalar.assign(static_cast<std::size_t>(d), 0.0);
  out.vectors.assign(static_cast<std::size_t>(c), Vec3{});
  out.tensors.assign(static_cast<std::size_t>(k), Mat3{});
  for (const auto& m : messages) {
    if (m.scalar.size() != out.scalar.size() || m.vectors.size() != out.vectors.size() ||
        m.tensors.size() != out.tensors.size()) {
      throw std::invalid_argument("aggregate: message shape mismatch");
    }
    for (std::size_t q = 0; q < out.scalar.size(); ++q) out.scalar[q] += m.scalar[q];
    for (std::size_t q = 0; q < out.vectors.size(); ++q) out.vectors[q] += m.vectors[q];
    for (std::size_t q = 0; q < out.tensors.size(); ++q) out.tensors[q] += m.tensors[q];
  }
  return out;
}

NodeState node_update(const ModelParams& params, int layer, const Message& m_i,
                      std::span<const double> h_i, const Frame* f_i,
                      std::span<const Vec3> previous_v, std::span<const Mat3> previous_t) {
  check_layer(params, layer);
  const Kernels<double> kern(params.config, params.layout, params.values.data());
  MessageT<double> m{m_i.scalar, m_i.vectors, m_i.tensors};
  NodeStateT<double> s = kern.update(layer, m, h_i.data(), f_i, previous_v, previous_t);
  return {std::move(s.h), std::move(s.v), std::move(s.tensors)};
}

template <class T>
std::vector<Vec3T<T>> updated_vectors(const ModelConfig& config, const ParamLayout& layout,
                                      std::span<const T> params, int layer, std::span<const T> h,
                                      std::span<const T> m_scalar, std::span<const Vec3T<T>> m_vectors,
                                      const FrameT<T>& frame) {
  if (layer < 0 || layer >= config.num_layers) throw std::out_of_range("updated_vectors: bad layer");
  const Kernels<T> kern(config, layout, params.data());
  MessageT<T> m{std::vector<T>(m_scalar.begin(), m_scalar.end()),
                std::vector<Vec3T<T>>(m_vectors.begin(), m_vectors.end()),
                std::vector<Mat3T<T>>(static_cast<std::size_t>(kern.k()))};
  return kern.update(layer, m, h.data(), &frame, {}, {}).v;
}

template std::vector<Vec3T<double>> updated_vectors(const ModelConfig&, const ParamLayout&,
                                                    std::span<const double>, int, std::span<const double>,
                                                    std::span<const double>, std::span<const Vec3T<double>>,
                                                    const FrameT<double>&);
template std::vector<Vec3T<ad::Var>> updated_vectors(const ModelConfig&, const ParamLayout&,
                                                     std::span<const ad::Var>, int,
                                                     std::span<const ad::Var>, std::span<const ad::Var>,
                                                     std::span<const Vec3T<ad::Var>>,
                                                     const FrameT<ad::Var>&);

}  // namespace leftnet
