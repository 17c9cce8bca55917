// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/probes.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "leftnet/datasets.hpp"
#include "leftnet/train.hpp"

namespace leftnet {
namespace {

// Geometric decay from lr0 to lr1 over the run.
double decayed(double lr0, double lr1, int step, int steps) {
  return lr0 * std::pow(lr1 / lr0, static_cast<double>(step) / static_cast<double>(steps));
}

double variance(const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  return var / static_cast<double>(y.size());
}

// --- scalar-only baseline --------------------------------------------------

constexpr int kSummaryDim = 13;

Eigen::RowVectorXd cluster_summary(const std::vector<Vec3>& x) {
  Eigen::RowVectorXd f(kSummaryDim);
  int k = 0;
  for (const std::array<int, 4>& cluster : {std::array<int, 4>{0, 1, 3, 4}, std::array<int, 4>{0, 2, 5, 6}}) {
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        f(k++) = norm(x[static_cast<std::size_t>(cluster[static_cast<std::size_t>(p)])] -
                      x[static_cast<std::size_t>(cluster[static_cast<std::size_t>(q)])]);
      }
    }
  }
  f(k) = norm(x[1] - x[2]);
  return f;
}

// tanh MLP kSummaryDim -> H -> H -> 1 with hand-written backprop.
class SummaryMlp {
 public:
  SummaryMlp(int hidden, std::mt19937_64& rng) : h_(hidden) {
    theta_.assign(size(), 0.0);
    auto fill = [&](std::size_t off, int in, int out) {
      std::uniform_real_distribution<double> u(-std::sqrt(3.0 / in), std::sqrt(3.0 / in));
      for (int k = 0; k < in * out; ++k) theta_[off + static_cast<std::size_t>(k)] = u(rng);
    };
    fill(w1(), kSummaryDim, h_);
    fill(w2(), h_, h_);
    fill(w3(), h_, 1);
  }

  std::vector<double>& params() { return theta_; }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a1, a2;
    return run(theta_.data(), x, a1, a2);
  }

  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<double>& grad) const {
    Eigen::MatrixXd a1, a2;
    const Eigen::VectorXd out = run(theta_.data(), x, a1, a2);
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd r = out - y;
    grad.assign(theta_.size(), 0.0);
    Eigen::Map<Eigen::MatrixXd> g_w1(grad.data() + w1(), kSummaryDim, h_);
    Eigen::Map<Eigen::VectorXd> g_b1(grad.data() + b1(), h_);
    Eigen::Map<Eigen::MatrixXd> g_w2(grad.data() + w2(), h_, h_);
    Eigen::Map<Eigen::VectorXd> g_b2(grad.data() + b2(), h_);
    Eigen::Map<Eigen::VectorXd> g_w3(grad.data() + w3(), h_);
    const Eigen::VectorXd d_out = r * (2.0 / n);
    g_w3 = a2.transpose() * d_out;
    grad[b3()] = d_out.sum();
    const Eigen::Map<const Eigen::VectorXd> w3v(theta_.data() + w3(), h_);
    const Eigen::Map<const Eigen::MatrixXd> w2m(theta_.data() + w2(), h_, h_);
    Eigen::MatrixXd d2 = (d_out * w3v.transpose()).array() * (1.0 - a2.array().square());
    g_w2 = a1.transpose() * d2;
    g_b2 = d2.colwise().sum().transpose();
    Eigen::MatrixXd d1 = (d2 * w2m.transpose()).array() * (1.0 - a1.array().square());
    g_w1 = x.transpose() * d1;
    g_b1 = d1.colwise().sum().transpose();
    return r.squaredNorm() / n;
  }

 private:
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return w1() + static_cast<std::size_t>(kSummaryDim * h_); }
  std::size_t w2() const { return b1() + static_cast<std::size_t>(h_); }
  std::size_t b2() const { return w2() + static_cast<std::size_t>(h_ * h_); }
  std::size_t w3() const { return b2() + static_cast<std::size_t>(h_); }
  std::size_t b3() const { return w3() + static_cast<std::size_t>(h_); }
  std::size_t size() const { return b3() + 1; }

  Eigen::VectorXd run(const double* p, const Eigen::MatrixXd& x, Eigen::MatrixXd& a1,
                      Eigen::MatrixXd& a2) const {
    const Eigen::Map<const Eigen::MatrixXd> w1m(p + w1(), kSummaryDim, h_);
    const Eigen::Map<const Eigen::RowVectorXd> b1v(p + b1(), h_);
    const Eigen::Map<const Eigen::MatrixXd> w2m(p + w2(), h_, h_);
    const Eigen::Map<const Eigen::RowVectorXd> b2v(p + b2(), h_);
    const Eigen::Map<const Eigen::VectorXd> w3v(p + w3(), h_);
    a1 = ((x * w1m).rowwise() + b1v).array().tanh();
    a2 = ((a1 * w2m).rowwise() + b2v).array().tanh();
    return (a2 * w3v).array() + p[b3()];
  }

  int h_;
  std::vector<double> theta_;
};

ProbeResult scalar_only_probe(const std::vector<TwoHopSample>& train, const std::vector<TwoHopSample>& test,
                              std::uint64_t seed, int steps) {
  auto features = [](const std::vector<TwoHopSample>& set) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(set.size()), kSummaryDim);
    Eigen::VectorXd y(static_cast<Eigen::Index>(set.size()));
    for (std::size_t s = 0; s < set.size(); ++s) {
      x.row(static_cast<Eigen::Index>(s)) = cluster_summary(set[s].frame.positions);
      y(static_cast<Eigen::Index>(s)) = set[s].target;
    }
    return std::pair{x, y};
  };
  auto [x_train, y_train] = features(train);
  auto [x_test, y_test] = features(test);
  const Eigen::RowVectorXd mean = x_train.colwise().mean();
  const Eigen::RowVectorXd scale =
      ((x_train.rowwise() - mean).array().square().colwise().mean().sqrt() + 1e-12).inverse();
  x_train = (x_train.rowwise() - mean).array().rowwise() * scale.array();
  x_test = (x_test.rowwise() - mean).array().rowwise() * scale.array();

  std::mt19937_64 rng(seed);
  SummaryMlp mlp(32, rng);
  AdamState adam;
  std::vector<double> grad;
  for (int step = 0; step < steps; ++step) {
    mlp.loss_and_gradient(x_train, y_train, grad);
    adam_step(mlp.params(), grad, adam, decayed(3e-3, 3e-4, step, steps));
  }
  ProbeResult out;
  out.train_mse = (mlp.predict(x_train) - y_train).squaredNorm() / static_cast<double>(y_train.size());
  out.test_mse = (mlp.predict(x_test) - y_test).squaredNorm() / static_cast<double>(y_test.size());
  return out;
}

// --- equivariant model -----------------------------------------------------

struct ProbeGraph {
  GeometricGraph graph;
  Topology topo;
  double target;
};

std::vector<ProbeGraph> probe_graphs(const std::vector<TwoHopSample>& set) {
  std::vector<ProbeGraph> out;
  for (const auto& s : set) {
    GeometricGraph g = build_radius_graph(s.frame.positions, kTwoHopCutoff, s.frame.atomic_numbers);
    Topology t = build_topology(g);
    out.push_back({std::move(g), std::move(t), s.target});
  }
  return out;
}

double central_prediction(const ModelParams& params, const ProbeGraph& g) {
  ForwardOptions opts;
  opts.readout_node = 0;
  return forward<double>(params.config, params.layout, params.values, g.graph.positions,
                         g.graph.atomic_numbers, g.topo, opts)
      .energy;
}

double probe_mse(const ModelParams& params, const std::vector<ProbeGraph>& set) {
  double sq = 0.0;
  for (const auto& g : set) {
    const double r = central_prediction(params, g) - g.target;
    sq += r * r;
  }
  return sq / static_cast<double>(set.size());
}

ProbeResult equivariant_probe(const std::vector<TwoHopSample>& train, const std::vector<TwoHopSample>& test,
                              const ModelConfig& config, std::uint64_t seed, int steps) {
  const auto train_graphs = probe_graphs(train);
  const auto test_graphs = probe_graphs(test);
  ModelParams params = init_params(config, seed);
  ForwardOptions opts;
  opts.readout_node = 0;
  AdamState adam;
  std::vector<double> grad(params.values.size());
  ad::Tape tape;
  const double inv_n = 1.0 / static_cast<double>(train_graphs.size());
  for (int step = 0; step < steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& g : train_graphs) {
      tape.clear();
      ad::TapeScope scope(tape);
      std::vector<ad::Var> theta;
      theta.reserve(params.values.size());
      for (double w : params.values) theta.push_back(tape.variable(w));
      std::vector<Vec3T<ad::Var>> pos;
      for (const Vec3& x : g.graph.positions) pos.push_back(Vec3T<ad::Var>::from(x));
      const auto res = forward<ad::Var>(params.config, params.layout, theta, pos, g.graph.atomic_numbers,
                                        g.topo, opts);
      const ad::Var root = res.energy * (2.0 * (res.energy.v - g.target) * inv_n);
      const std::vector<double> adj = tape.adjoints(root);
      for (std::size_t k = 0; k < theta.size(); ++k) grad[k] += adj[static_cast<std::size_t>(theta[k].id)];
    }
    adam_step(params.values, grad, adam, decayed(5e-3, 2e-4, step, steps));
  }
  return {probe_mse(params, train_graphs), probe_mse(params, test_graphs), 0.0};
}

}  // namespace

ModelConfig two_hop_model_config() {
  ModelConfig c;
  c.num_layers = 2;
  c.hidden_dim = 12;
  c.vector_channels = 4;
  c.cutoff = kTwoHopCutoff;
  c.num_rbf = 6;
  c.use_lse = false;
  c.use_fte = true;
  return c;
}

ProbeResult two_hop_probe(std::uint64_t seed, ProbeModel model, const TwoHopConfig& cfg) {
  std::mt19937_64 rng(seed);
  std::vector<TwoHopSample> train, test;
  for (int s = 0; s < cfg.train_size; ++s) train.push_back(two_hop_sample(rng()));
  for (int s = 0; s < cfg.test_size; ++s) test.push_back(two_hop_sample(rng()));
  const std::uint64_t init_seed = rng();
  ProbeResult out = model == ProbeModel::kScalarOnly ? scalar_only_probe(train, test, init_seed, cfg.steps)
                                                     : equivariant_probe(train, test, cfg.model, init_seed, cfg.steps);
  std::vector<double> y;
  for (const auto& s : test) y.push_back(s.target);
  out.target_variance = variance(y);
  return out;
}

// --- node update fit -------------------------------------------------------

ProbeResult fit_node_update(std::uint64_t seed, const UpdateFitConfig& cfg) {
  ModelConfig mc;
  mc.num_layers = 1;
  mc.hidden_dim = cfg.hidden_dim;
  mc.vector_channels = 1;
  mc.num_rbf = 1;
  mc.use_lse = false;
  ModelParams params = init_params(mc, seed);

  std::mt19937_64 rng(seed ^ 0xf17'0de'0ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> cube(-1.0, 1.0);
  const Vec3 a_local{gauss(rng), gauss(rng), gauss(rng)};
  const Vec3 b_local{gauss(rng), gauss(rng), gauss(rng)};

  struct Case {
    Frame frame;
    Vec3 v;
    Vec3 target;
  };
  auto draw = [&]() {
    const Mat3 r = random_rotation(rng()).rotation;
    Case c{Frame{r.row(0), r.row(1), r.row(2)}, Vec3{cube(rng), cube(rng), cube(rng)}, {}};
    const Vec3 a = tensorize(std::array<double, 3>{a_local.x, a_local.y, a_local.z}, c.frame);
    const Vec3 b = tensorize(std::array<double, 3>{b_local.x, b_local.y, b_local.z}, c.frame);
    c.target = c.v * dot(c.v, a) + cross(b, c.v);
    return c;
  };

  const auto d = static_cast<std::size_t>(mc.hidden_dim);
  const std::vector<double> zeros(d, 0.0);
  auto predict_one = [&](const Case& c) {
    const std::vector<Vec3> m{c.v};
    return updated_vectors<double>(mc, params.layout, params.values, 0, zeros, zeros, m, c.frame)[0];
  };

  AdamState adam;
  std::vector<double> grad(params.values.size());
  ad::Tape tape;
  const double inv = 1.0 / (3.0 * cfg.batch_size);
  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    tape.clear();
    ad::TapeScope scope(tape);
    std::vector<ad::Var> theta;
    theta.reserve(params.values.size());
    for (double w : params.values) theta.push_back(tape.variable(w));
    const std::vector<ad::Var> zero_var(d, ad::Var(0.0));
    ad::Var total(0.0);
    for (int s = 0; s < cfg.batch_size; ++s) {
      const Case c = draw();
      const FrameT<ad::Var> f{Vec3T<ad::Var>::from(c.frame.e1), Vec3T<ad::Var>::from(c.frame.e2),
                              Vec3T<ad::Var>::from(c.frame.e3)};
      const std::vector<Vec3T<ad::Var>> m{Vec3T<ad::Var>::from(c.v)};
      const auto out = updated_vectors<ad::Var>(mc, params.layout, theta, 0, zero_var, zero_var, m, f)[0];
      const Vec3T<ad::Var> r = out - Vec3T<ad::Var>::from(c.target);
      total += dot(r, r);
    }
    const std::vector<double> adj = tape.adjoints(total * inv);
    for (std::size_t k = 0; k < theta.size(); ++k) grad[k] = adj[static_cast<std::size_t>(theta[k].id)];
    adam_step(params.values, grad, adam, decayed(1e-2, 1e-5, step, cfg.steps));
  }

  std::vector<double> components;
  double sq = 0.0;
  for (int s = 0; s < cfg.test_size; ++s) {
    const Case c = draw();
    const Vec3 r = predict_one(c) - c.target;
    sq += squared_norm(r);
    for (int k = 0; k < 3; ++k) components.push_back(c.target[k]);
  }
  ProbeResult out;
  out.test_mse = sq / (3.0 * cfg.test_size);
  out.train_mse = out.test_mse;  // every training batch is fresh
  out.target_variance = variance(components);
  return out;
}

}  // namespace leftnet
