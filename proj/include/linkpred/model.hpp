#pragma once

// Model parameters and the per-example math for the three reconstruction
// models: a linear-factor model, a denoising autoencoder over neighborhood
// rows, and the joint model that shares one factor pair between both.
//
// Conventions:
//  * The encoder maps an input node m to a K-vector (enc row m); stacked as
//    a K x N matrix these rows are the columns of the classic first-layer
//    weight matrix W1.  The decoder maps the hidden vector to a score for
//    output node j (dec row j); stacked they form the second-layer matrix
//    W2.  Tied weights mean enc == dec entrywise, i.e. W1 == transpose(W2).
//  * Dropout masks are applied during training; inference rescales by the
//    keep probabilities instead (expected-value scaling).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/numerics.hpp"

namespace linkpred {

enum class ModelVariant : std::uint8_t {
  MfLinear = 0,     // linear hidden layer, factor lookup input
  Autoencoder = 1,  // ReLU hidden layer over the neighborhood row
  Joint = 2,        // both branches, shared encoder/decoder
};

inline const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::MfLinear: return "mf-linear";
    case ModelVariant::Autoencoder: return "autoencoder";
    case ModelVariant::Joint: return "joint";
  }
  return "?";
}

inline bool has_ae_branch(ModelVariant v) { return v != ModelVariant::MfLinear; }
inline bool has_mf_branch(ModelVariant v) { return v != ModelVariant::Autoencoder; }

struct ModelParams {
  DenseMatrix enc;  // N x K, row m = latent vector of input node m
  DenseMatrix dec;  // N x K, row j = latent vector of output node j
  std::vector<double> ae_hidden_bias;  // K
  std::vector<double> ae_output_bias;  // N
  std::vector<double> mf_hidden_bias;  // K
  std::vector<double> mf_output_bias;  // N
  int latent_dim = 0;
  bool tied = false;
  double rho = 1.0;  // joint-loss weight of the factor branch
  ModelVariant variant = ModelVariant::Joint;
  // Keep probabilities the model was trained with; inference scales by them.
  double keep_hidden = 1.0;
  double keep_input = 1.0;

  NodeId num_nodes() const { return static_cast<NodeId>(enc.rows); }

  // Classic-layout accessors: w1 is K x N, w2 is N x K.
  double& w1(std::size_t k, std::size_t m) { return enc(m, k); }
  double w1(std::size_t k, std::size_t m) const { return enc(m, k); }
  double& w2(std::size_t j, std::size_t k) { return dec(j, k); }
  double w2(std::size_t j, std::size_t k) const { return dec(j, k); }

  /// Fresh parameters: weights uniform in (-0.05, 0.05) scaled by 1/sqrt(K),
  /// biases zero. Tied models share one weight matrix between the roles.
  static ModelParams init(ModelVariant variant, int latent_dim, NodeId num_nodes,
                          bool tied, double rho, std::uint64_t seed) {
    if (latent_dim < 1) throw std::invalid_argument("init: latent_dim must be >= 1");
    if (num_nodes < 1) throw std::invalid_argument("init: num_nodes must be >= 1");
    if (rho < 0.0) throw std::invalid_argument("init: rho must be >= 0");
    ModelParams p;
    p.variant = variant;
    p.latent_dim = latent_dim;
    p.tied = tied;
    p.rho = rho;
    const std::size_t n = static_cast<std::size_t>(num_nodes);
    const std::size_t k = static_cast<std::size_t>(latent_dim);
    p.enc = DenseMatrix(n, k);
    p.dec = DenseMatrix(n, k);
    RngState rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    for (double& w : p.enc.data) w = rng.next_uniform(-0.05, 0.05) * scale;
    if (tied) {
      p.dec.data = p.enc.data;
    } else {
      for (double& w : p.dec.data) w = rng.next_uniform(-0.05, 0.05) * scale;
    }
    p.ae_hidden_bias.assign(k, 0.0);
    p.ae_output_bias.assign(n, 0.0);
    p.mf_hidden_bias.assign(k, 0.0);
    p.mf_output_bias.assign(n, 0.0);
    return p;
  }
};

struct DropoutMasks {
  std::vector<std::uint8_t> hidden;  // K entries, shared by both branches
  std::vector<std::uint8_t> input;   // N entries, autoencoder input only

  static DropoutMasks all_ones(int latent_dim, NodeId num_nodes) {
    DropoutMasks m;
    m.hidden.assign(static_cast<std::size_t>(latent_dim), 1);
    m.input.assign(static_cast<std::size_t>(num_nodes), 1);
    return m;
  }
};

enum class ForwardMode { Train, Infer };

/// One branch's forward pass: hidden pre-activation, hidden activation, and
/// the reconstruction over all N output nodes.
struct BranchOutput {
  std::vector<double> preact;
  std::vector<double> hidden;
  std::vector<double> recon;
};

namespace detail {

// u = bias + input_scale * sum of encoder rows listed in `inputs`.
inline void hidden_preact(const ModelParams& p, std::span<const NodeId> inputs,
                          double input_scale, const std::vector<double>& bias,
                          std::vector<double>& preact) {
  const std::size_t k = static_cast<std::size_t>(p.latent_dim);
  std::vector<double> acc(k, 0.0);
  for (NodeId m : inputs) {
    const auto row = p.enc.row(static_cast<std::size_t>(m));
    for (std::size_t t = 0; t < k; ++t) acc[t] += row[t];
  }
  preact.resize(k);
  for (std::size_t t = 0; t < k; ++t) preact[t] = bias[t] + input_scale * acc[t];
}

// Hidden vector as seen by the output layer: masked during training,
// rescaled by the keep probability at inference.
inline void masked_hidden(const std::vector<double>& hidden,
                          const std::vector<std::uint8_t>& mask,
                          ForwardMode mode, double keep_prob,
                          std::vector<double>& out) {
  const std::size_t k = hidden.size();
  out.resize(k);
  if (mode == ForwardMode::Train) {
    for (std::size_t t = 0; t < k; ++t) out[t] = mask[t] ? hidden[t] : 0.0;
  } else {
    for (std::size_t t = 0; t < k; ++t) out[t] = keep_prob * hidden[t];
  }
}

inline double output_logit(const ModelParams& p, const std::vector<double>& mh,
                           const std::vector<double>& bias, NodeId j) {
  return bias[static_cast<std::size_t>(j)] +
         dot(p.dec.row(static_cast<std::size_t>(j)), std::span<const double>(mh));
}

inline void check_hidden_mask(const ModelParams& p, const DropoutMasks& masks) {
  if (masks.hidden.size() != static_cast<std::size_t>(p.latent_dim))
    throw std::invalid_argument("mask: hidden size != latent_dim");
}

}  // namespace detail

/// Autoencoder branch. `neighborhood` is the binary row of the train graph
/// for the example node (nonzero = linked). Train mode applies the input and
/// hidden masks; infer mode rescales by the keep probabilities instead.
inline BranchOutput ae_forward(const ModelParams& p,
                               std::span<const double> neighborhood,
                               const DropoutMasks& masks, ForwardMode mode) {
  const std::size_t n = static_cast<std::size_t>(p.num_nodes());
  if (neighborhood.size() != n)
    throw std::invalid_argument("ae_forward: input size != num_nodes");
  std::vector<NodeId> inputs;
  double input_scale = 1.0;
  if (mode == ForwardMode::Train) {
    detail::check_hidden_mask(p, masks);
    if (masks.input.size() != n)
      throw std::invalid_argument("ae_forward: input mask size != num_nodes");
    for (std::size_t m = 0; m < n; ++m)
      if (neighborhood[m] != 0.0 && masks.input[m]) inputs.push_back(static_cast<NodeId>(m));
  } else {
    input_scale = p.keep_input;
    for (std::size_t m = 0; m < n; ++m)
      if (neighborhood[m] != 0.0) inputs.push_back(static_cast<NodeId>(m));
  }

  BranchOutput out;
  detail::hidden_preact(p, inputs, input_scale, p.ae_hidden_bias, out.preact);
  out.hidden.resize(out.preact.size());
  for (std::size_t t = 0; t < out.preact.size(); ++t)
    out.hidden[t] = relu(out.preact[t]);

  std::vector<double> mh;
  detail::masked_hidden(out.hidden, masks.hidden, mode, p.keep_hidden, mh);
  out.recon.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    out.recon[j] = sigmoid(detail::output_logit(p, mh, p.ae_output_bias,
                                                static_cast<NodeId>(j)));
  return out;
}

/// Factor branch for example node i: the hidden vector is the node's encoder
/// row plus bias, passed through ReLU except in the linear variant.
inline BranchOutput mf_forward(const ModelParams& p, NodeId i,
                               const DropoutMasks& masks, ForwardMode mode) {
  const std::size_t n = static_cast<std::size_t>(p.num_nodes());
  if (i < 0 || static_cast<std::size_t>(i) >= n)
    throw std::out_of_range("mf_forward: node out of range");
  if (mode == ForwardMode::Train) detail::check_hidden_mask(p, masks);

  const std::size_t k = static_cast<std::size_t>(p.latent_dim);
  BranchOutput out;
  out.preact.resize(k);
  const auto row = p.enc.row(static_cast<std::size_t>(i));
  for (std::size_t t = 0; t < k; ++t) out.preact[t] = p.mf_hidden_bias[t] + row[t];
  out.hidden.resize(k);
  if (p.variant == ModelVariant::MfLinear) {
    out.hidden = out.preact;
  } else {
    for (std::size_t t = 0; t < k; ++t) out.hidden[t] = relu(out.preact[t]);
  }

  std::vector<double> mh;
  detail::masked_hidden(out.hidden, masks.hidden, mode, p.keep_hidden, mh);
  out.recon.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    out.recon[j] = sigmoid(detail::output_logit(p, mh, p.mf_output_bias,
                                                static_cast<NodeId>(j)));
  return out;
}

/// Gradient container. Layout mirrors ModelParams. For tied parameters the
/// shared weight matrix's full derivative (encoder role + decoder role) is
/// accumulated in `enc` and `dec` is left zero.
struct Gradients {
  DenseMatrix enc;
  DenseMatrix dec;
  std::vector<double> ae_hidden_bias;
  std::vector<double> ae_output_bias;
  std::vector<double> mf_hidden_bias;
  std::vector<double> mf_output_bias;

  static Gradients zeros_like(const ModelParams& p) {
    Gradients g;
    g.enc = DenseMatrix(p.enc.rows, p.enc.cols);
    g.dec = DenseMatrix(p.dec.rows, p.dec.cols);
    g.ae_hidden_bias.assign(p.ae_hidden_bias.size(), 0.0);
    g.ae_output_bias.assign(p.ae_output_bias.size(), 0.0);
    g.mf_hidden_bias.assign(p.mf_hidden_bias.size(), 0.0);
    g.mf_output_bias.assign(p.mf_output_bias.size(), 0.0);
    return g;
  }
};

namespace detail {

// Everything the backward pass needs from one example's forward pass.
// Outputs are restricted to the example's positives (train neighbors of i)
// followed by its sampled negatives.
struct ExampleForward {
  NodeId node = -1;
  std::vector<NodeId> outputs;
  std::size_t num_pos = 0;
  double eta = 0.0;
  double loss = 0.0;

  std::vector<NodeId> active_inputs;  // masked neighborhood driving the AE
  std::vector<double> ae_preact, ae_hidden, ae_masked, ae_delta;
  std::vector<double> mf_preact, mf_hidden, mf_masked, mf_delta;
  std::vector<double> ae_back, mf_back;  // dL/d(hidden preact), length K
};

inline void check_example_inputs(const ModelParams& p, const SparseGraph& g,
                                 NodeId i, std::span<const NodeId> negatives,
                                 const DropoutMasks& masks) {
  if (g.num_nodes() != p.num_nodes())
    throw std::invalid_argument("example: graph/model node count mismatch");
  if (i < 0 || i >= g.num_nodes())
    throw std::out_of_range("example: node out of range");
  check_hidden_mask(p, masks);
  if (has_ae_branch(p.variant) &&
      masks.input.size() != static_cast<std::size_t>(p.num_nodes()))
    throw std::invalid_argument("example: input mask size != num_nodes");
  for (NodeId j : negatives) {
    if (j < 0 || j >= g.num_nodes())
      throw std::out_of_range("example: negative sample out of range");
    if (j == i || g.has_edge(i, j))
      throw std::invalid_argument("example: negative sample is a link");
  }
}

// Loss weight of the factor branch inside the example objective.
inline double mf_branch_weight(const ModelParams& p) {
  return p.variant == ModelVariant::Joint ? p.rho : 1.0;
}

/// Forward pass of one training example (train-mode masking throughout).
/// The example objective is
///   sum_{j in pos} ce(1, recon_j) + eta * sum_{j in neg} ce(0, recon_j)
/// per active branch, with the factor branch weighted by rho in the joint
/// variant. Output deltas d(loss)/d(logit_j) are stored for the backward
/// pass; they use the unclamped sigmoid/cross-entropy form weight*(p - t).
inline void forward_example(const ModelParams& p, const SparseGraph& g, NodeId i,
                            std::span<const NodeId> negatives,
                            const DropoutMasks& masks, double eta,
                            ExampleForward& fwd) {
  check_example_inputs(p, g, i, negatives, masks);
  const std::size_t k = static_cast<std::size_t>(p.latent_dim);

  fwd.node = i;
  fwd.eta = eta;
  const auto& pos = g.neighbors(i);
  fwd.num_pos = pos.size();
  fwd.outputs.clear();
  fwd.outputs.insert(fwd.outputs.end(), pos.begin(), pos.end());
  fwd.outputs.insert(fwd.outputs.end(), negatives.begin(), negatives.end());

  fwd.loss = 0.0;
  const double mf_weight = mf_branch_weight(p);

  if (has_ae_branch(p.variant)) {
    fwd.active_inputs.clear();
    for (NodeId m : pos)
      if (masks.input[static_cast<std::size_t>(m)]) fwd.active_inputs.push_back(m);
    hidden_preact(p, fwd.active_inputs, 1.0, p.ae_hidden_bias, fwd.ae_preact);
    fwd.ae_hidden.resize(k);
    for (std::size_t t = 0; t < k; ++t) fwd.ae_hidden[t] = relu(fwd.ae_preact[t]);
    masked_hidden(fwd.ae_hidden, masks.hidden, ForwardMode::Train, 1.0, fwd.ae_masked);
    fwd.ae_delta.resize(fwd.outputs.size());
    double branch_loss = 0.0;
    for (std::size_t t = 0; t < fwd.outputs.size(); ++t) {
      const NodeId j = fwd.outputs[t];
      const bool is_pos = t < fwd.num_pos;
      const double target = is_pos ? 1.0 : 0.0;
      const double weight = is_pos ? 1.0 : eta;
      const double prob = sigmoid(output_logit(p, fwd.ae_masked, p.ae_output_bias, j));
      branch_loss += weight * cross_entropy(target, prob);
      fwd.ae_delta[t] = weight * (prob - target);
    }
    fwd.loss += branch_loss;
  }

  if (has_mf_branch(p.variant)) {
    fwd.mf_preact.resize(k);
    const auto row = p.enc.row(static_cast<std::size_t>(i));
    for (std::size_t t = 0; t < k; ++t)
      fwd.mf_preact[t] = p.mf_hidden_bias[t] + row[t];
    fwd.mf_hidden.resize(k);
    if (p.variant == ModelVariant::MfLinear) {
      fwd.mf_hidden = fwd.mf_preact;
    } else {
      for (std::size_t t = 0; t < k; ++t) fwd.mf_hidden[t] = relu(fwd.mf_preact[t]);
    }
    masked_hidden(fwd.mf_hidden, masks.hidden, ForwardMode::Train, 1.0, fwd.mf_masked);
    fwd.mf_delta.resize(fwd.outputs.size());
    double branch_loss = 0.0;
    for (std::size_t t = 0; t < fwd.outputs.size(); ++t) {
      const NodeId j = fwd.outputs[t];
      const bool is_pos = t < fwd.num_pos;
      const double target = is_pos ? 1.0 : 0.0;
      const double weight = is_pos ? 1.0 : eta;
      const double prob = sigmoid(output_logit(p, fwd.mf_masked, p.mf_output_bias, j));
      branch_loss += weight * cross_entropy(target, prob);
      fwd.mf_delta[t] = mf_weight * weight * (prob - target);
    }
    fwd.loss += mf_weight * branch_loss;
  }
}

/// Backpropagates the stored output deltas to the hidden pre-activations:
/// back[t] = activation'(preact[t]) * mask[t] * sum_j delta_j * dec(j, t).
inline void backward_hidden(const ModelParams& p, const DropoutMasks& masks,
                            const std::vector<NodeId>& outputs,
                            const std::vector<double>& delta,
                            const std::vector<double>& preact, bool linear,
                            std::vector<double>& back) {
  const std::size_t k = static_cast<std::size_t>(p.latent_dim);
  back.assign(k, 0.0);
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    const double d = delta[t];
    if (d == 0.0) continue;
    const auto row = p.dec.row(static_cast<std::size_t>(outputs[t]));
    for (std::size_t u = 0; u < k; ++u) back[u] += d * row[u];
  }
  for (std::size_t u = 0; u < k; ++u) {
    const double gate = masks.hidden[u] ? 1.0 : 0.0;
    const double act = linear ? 1.0 : relu_grad(preact[u]);
    back[u] *= gate * act;
  }
}

inline void backward_example(const ModelParams& p, const DropoutMasks& masks,
                             ExampleForward& fwd) {
  if (has_ae_branch(p.variant))
    backward_hidden(p, masks, fwd.outputs, fwd.ae_delta, fwd.ae_preact,
                    /*linear=*/false, fwd.ae_back);
  if (has_mf_branch(p.variant))
    backward_hidden(p, masks, fwd.outputs, fwd.mf_delta, fwd.mf_preact,
                    p.variant == ModelVariant::MfLinear, fwd.mf_back);
}

}  // namespace detail

/// Example loss actually optimized by training: cross entropy over the
/// node's train neighbors (target 1) and the supplied negative samples
/// (target 0, weighted by eta), with train-mode dropout masks applied.
inline double example_loss(const ModelParams& p, const SparseGraph& g, NodeId i,
                           std::span<const NodeId> negatives,
                           const DropoutMasks& masks, double eta) {
  detail::ExampleForward fwd;
  detail::forward_example(p, g, i, negatives, masks, eta, fwd);
  return fwd.loss;
}

/// Dense gradient of example_loss with respect to every parameter. With tied
/// weights the shared matrix's derivative (both roles summed) is returned in
/// `enc` and `dec` stays zero.
inline Gradients example_gradient(const ModelParams& p, const SparseGraph& g,
                                  NodeId i, std::span<const NodeId> negatives,
                                  const DropoutMasks& masks, double eta) {
  detail::ExampleForward fwd;
  detail::forward_example(p, g, i, negatives, masks, eta, fwd);
  detail::backward_example(p, masks, fwd);

  Gradients grad = Gradients::zeros_like(p);
  const std::size_t k = static_cast<std::size_t>(p.latent_dim);
  DenseMatrix& dec_sink = p.tied ? grad.enc : grad.dec;

  if (has_ae_branch(p.variant)) {
    for (std::size_t t = 0; t < fwd.outputs.size(); ++t) {
      const NodeId j = fwd.outputs[t];
      const double d = fwd.ae_delta[t];
      grad.ae_output_bias[static_cast<std::size_t>(j)] += d;
      auto row = dec_sink.row(static_cast<std::size_t>(j));
      for (std::size_t u = 0; u < k; ++u) row[u] += d * fwd.ae_masked[u];
    }
    for (std::size_t u = 0; u < k; ++u) grad.ae_hidden_bias[u] += fwd.ae_back[u];
    for (NodeId m : fwd.active_inputs) {
      auto row = grad.enc.row(static_cast<std::size_t>(m));
      for (std::size_t u = 0; u < k; ++u) row[u] += fwd.ae_back[u];
    }
  }
  if (has_mf_branch(p.variant)) {
    for (std::size_t t = 0; t < fwd.outputs.size(); ++t) {
      const NodeId j = fwd.outputs[t];
      const double d = fwd.mf_delta[t];
      grad.mf_output_bias[static_cast<std::size_t>(j)] += d;
      auto row = dec_sink.row(static_cast<std::size_t>(j));
      for (std::size_t u = 0; u < k; ++u) row[u] += d * fwd.mf_masked[u];
    }
    for (std::size_t u = 0; u < k; ++u) grad.mf_hidden_bias[u] += fwd.mf_back[u];
    auto row = grad.enc.row(static_cast<std::size_t>(i));
    for (std::size_t u = 0; u < k; ++u) row[u] += fwd.mf_back[u];
  }
  return grad;
}

/// Geometric-mean combination of the two branch reconstructions:
/// (ae * mf^rho)^(1/(1+rho)). rho = 0 returns the autoencoder scores
/// unchanged.
inline std::vector<double> combine_predictions(std::span<const double> ae,
                                               std::span<const double> mf,
                                               double rho) {
  if (ae.size() != mf.size())
    throw std::invalid_argument("combine: size mismatch");
  if (rho < 0.0) throw std::invalid_argument("combine: rho must be >= 0");
  std::vector<double> out(ae.size());
  if (rho == 0.0) {
    std::copy(ae.begin(), ae.end(), out.begin());
    return out;
  }
  const double expo = 1.0 / (1.0 + rho);
  for (std::size_t t = 0; t < ae.size(); ++t)
    out[t] = std::pow(ae[t] * std::pow(mf[t], rho), expo);
  return out;
}

/// Inference scores of node i against every node: branch reconstruction(s)
/// with expected-value scaling, combined geometrically for the joint model.
/// The autoencoder input is the node's row of `g` (the train graph).
inline std::vector<double> score_node(const ModelParams& p, const SparseGraph& g,
                                      NodeId i) {
  if (g.num_nodes() != p.num_nodes())
    throw std::invalid_argument("score_node: graph/model node count mismatch");
  if (i < 0 || i >= g.num_nodes())
    throw std::out_of_range("score_node: node out of range");
  const std::size_t n = static_cast<std::size_t>(p.num_nodes());

  DropoutMasks none;  // unused in infer mode
  std::vector<double> ae_scores, mf_scores;
  if (has_ae_branch(p.variant)) {
    std::vector<double> neighborhood(n, 0.0);
    for (NodeId m : g.neighbors(i)) neighborhood[static_cast<std::size_t>(m)] = 1.0;
    ae_scores = ae_forward(p, neighborhood, none, ForwardMode::Infer).recon;
  }
  if (has_mf_branch(p.variant)) {
    mf_scores = mf_forward(p, i, none, ForwardMode::Infer).recon;
  }
  switch (p.variant) {
    case ModelVariant::Autoencoder: return ae_scores;
    case ModelVariant::MfLinear: return mf_scores;
    case ModelVariant::Joint: return combine_predictions(ae_scores, mf_scores, p.rho);
  }
  throw std::logic_error("score_node: unknown variant");
}

}  // namespace linkpred
