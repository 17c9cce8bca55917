// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "leftnet/autodiff.hpp"
#include "leftnet/geometry.hpp"
#include "leftnet/graph.hpp"

namespace leftnet {

enum class Readout { kMean, kSum };

struct ModelConfig {
  int num_layers = 4;
  int hidden_dim = 128;
  int vector_channels = 16;
  bool use_tensor_channels = false;
  ScalarMode mode = ScalarMode::kSE3;
  double cutoff = 6.0;
  int num_rbf = 32;
  double rbf_gamma = 0.0;  // 0 selects 10 / cutoff^2
  Readout readout = Readout::kMean;
  bool use_lse = true;
  bool use_fte = true;
  // energy = energy_scale * readout + energy_shift * num_atoms
  double energy_scale = 1.0;
  double energy_shift = 0.0;

  RbfConfig rbf() const { return {num_rbf, cutoff, rbf_gamma}; }
  int tensor_channels() const { return use_fte && use_tensor_channels ? vector_channels : 0; }
  int fte_channels() const { return use_fte ? vector_channels : 0; }
  void validate() const;
};

inline constexpr std::size_t kNoBias = std::numeric_limits<std::size_t>::max();

struct DenseSpec {
  std::size_t weight = 0;  // out x in, row-major
  std::size_t bias = kNoBias;
  int in = 0;
  int out = 0;
};

/// Linear -> SiLU -> Linear.
struct MlpSpec {
  DenseSpec first;
  DenseSpec second;
  int in() const { return first.in; }
  int out() const { return second.out; }
};

struct LayerSpec {
  MlpSpec lse_mlp;         // scalarized member coordinates -> d
  DenseSpec lse_radial;    // rbf -> d
  DenseSpec lse_combine;   // [pooled, rbf(d_ij)] -> d
  MlpSpec message;         // [h_i, A * h_j, rbf] -> [scalar d | C | 3C | K]
  MlpSpec update_h;        // [h, m, t, tT] -> d
  MlpSpec update_v;        // same input -> 3C
  DenseSpec vector_skip;   // t -> 3C, no bias
  MlpSpec update_t;        // same input -> 9K
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct ParamLayout {
  std::size_t embedding = 0;  // 119 x d
  MlpSpec edge_init;          // [h_i, h_j, rbf] -> 2C
  std::vector<LayerSpec> layers;
  MlpSpec readout;            // d -> 1
  std::vector<ParamBlock> blocks;  // declaration order
  std::size_t total = 0;
};

ParamLayout make_layout(const ModelConfig& config);

inline constexpr int kNumElements = 118;

struct ModelParams {
  ModelConfig config;
  ParamLayout layout;
  std::vector<double> values;
};

/// Fan-in scaled uniform weights, zero biases, unit-variance embedding.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

struct ForwardOptions {
  /// Throw DegenerateGeometry instead of falling back to the invariant path.
  bool strict = false;
  /// When >= 0, the readout sees this node's final h instead of the pooled h,
  /// and only the receptive field of that node is computed.
  int readout_node = -1;
};

template <class T>
struct ForwardResult {
  std::vector<std::vector<T>> h;                 // per node, d
  std::vector<std::vector<Vec3T<T>>> v;          // per node, C
  std::vector<std::vector<Mat3T<T>>> tensors;    // per node, K
  std::vector<T> pooled;                         // readout input, d
  T graph_scalar{};                              // readout output
  T energy{};
  int degenerate_nodes = 0;
  int degenerate_edges = 0;
};

/// Runs every interaction block and the readout. `positions` may be
/// uncentered; they are centralized internally. T is double, ad::Var,
/// ad::Dual<double> or ad::Dual<ad::Var>.
template <class T>
ForwardResult<T> forward(const ModelConfig& config, const ParamLayout& layout,
                         std::span<const T> params, std::span<const Vec3T<T>> positions,
                         std::span<const int> atomic_numbers, const Topology& topo,
                         const ForwardOptions& options = {});

ForwardResult<double> forward(const GeometricGraph& graph, const ModelParams& params,
                              const ForwardOptions& options = {});

struct EnergyForces {
  double energy = 0.0;
  std::vector<Vec3> forces;
};

/// Energy and forces = -dE/dx through the reverse-mode tape.
EnergyForces energy_and_forces(const GeometricGraph& graph, const ModelParams& params,
                               const ForwardOptions& options = {});
EnergyForces energy_and_forces(const GeometricGraph& graph, const Topology& topo,
                               const ModelParams& params, const ForwardOptions& options = {});

// ---------------------------------------------------------------------------
// Individual stages, on doubles. Each is the exact code path forward uses.
// ---------------------------------------------------------------------------

/// Structure weights A_ij for the edge (sub.member_nodes[0], sub.member_nodes[1]).
/// Member positions must already be centralized.
std::vector<double> lse_weights(const ModelParams& params, int layer, const Substructure& sub,
                                const Frame& f_ij);

/// Scalar message for edge (i, j), including the cutoff envelope.
std::vector<double> invariant_message(const ModelParams& params, int layer,
                                      std::span<const double> h_i, std::span<const double> h_j,
                                      std::span<const double> a_ij, double d_ij);

struct Message {
  std::vector<double> scalar;
  std::vector<Vec3> vectors;
  std::vector<Mat3> tensors;
};

/// Full message: scalar part plus gated edge features and gated frame vectors.
/// A null frame drops the frame-dependent terms, as forward does on a
/// degenerate edge.
Message equivariant_message(const ModelParams& params, int layer, std::span<const double> h_i,
                            std::span<const double> h_j, std::span<const double> a_ij,
                            double d_ij, std::span<const Vec3> e_ij,
                            std::span<const Mat3> t_j, const Frame* f_ij);

/// Componentwise sum of messages arriving at one node.
Message aggregate(std::span<const Message> messages, int d, int c, int k);

struct NodeState {
  std::vector<double> h;
  std::vector<Vec3> v;
  std::vector<Mat3> tensors;
};

/// Scalarize -> MLP -> Tensorize through the node frame. A null frame keeps
/// `previous_v`/`previous_t` unchanged and feeds zeros for the scalarized input.
NodeState node_update(const ModelParams& params, int layer, const Message& m_i,
                      std::span<const double> h_i, const Frame* f_i,
                      std::span<const Vec3> previous_v = {}, std::span<const Mat3> previous_t = {});

/// node_update's vector path on double or ad::Var: the updated vector
/// channels for an incoming message at a node with features h and frame f.
template <class T>
std::vector<Vec3T<T>> updated_vectors(const ModelConfig& config, const ParamLayout& layout,
                                      std::span<const T> params, int layer, std::span<const T> h,
                                      std::span<const T> m_scalar, std::span<const Vec3T<T>> m_vectors,
                                      const FrameT<T>& frame);

}  // namespace leftnet
