#pragma once

// Stochastic training loop: per-node examples visited in a seeded random
// permutation, fresh dropout masks and negative samples per example, plain
// SGD steps with optional weight decay on the weight matrices, and a
// relative-change convergence test on the mean epoch loss.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/model.hpp"
#include "linkpred/numerics.hpp"

namespace linkpred {

/// Thrown when parameters or the epoch loss stop being finite.
class DivergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int max_epochs = 500;
  double keep_prob_hidden = 0.5;
  double keep_prob_input = 0.5;
  // Negative samples per node; 0 means 5 * degree(i), capped at the number
  // of available non-links.
  int neg_samples_per_node = 0;
  // Fixed weight for negative examples; nullopt = automatic reweighting
  // (links / negative samples, recomputed per node).
  std::optional<double> eta = std::nullopt;
  double weight_decay = 0.0;  // applies to the weight matrices, never biases
  std::uint64_t seed = 1;
  double convergence_tol = 1e-4;
  double rho = 1.0;
};

struct TrainReport {
  std::vector<double> epoch_losses;  // mean masked example loss per epoch
  int epochs_run = 0;
  bool converged = false;
  double eta_used = 0.0;  // mean negative-class weight over the first epoch
  double wall_time_seconds = 0.0;
};

/// Automatic negative-class weight: #links / #non-link samples.
inline double compute_eta(std::size_t num_links, std::size_t num_nonlink_samples) {
  if (num_links == 0 || num_nonlink_samples == 0)
    throw std::invalid_argument("compute_eta: counts must be positive");
  return static_cast<double>(num_links) / static_cast<double>(num_nonlink_samples);
}

/// Observer invoked once per visited example; used by tests to replay steps.
using ExampleObserver = std::function<void(
    int epoch, NodeId node, const DropoutMasks& masks,
    const std::vector<NodeId>& negatives, double eta)>;

namespace detail {

inline void validate_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw std::invalid_argument("train: learning_rate must be finite and >= 0");
  if (cfg.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (!(cfg.keep_prob_hidden > 0.0 && cfg.keep_prob_hidden <= 1.0))
    throw std::invalid_argument("train: keep_prob_hidden must be in (0,1]");
  if (!(cfg.keep_prob_input > 0.0 && cfg.keep_prob_input <= 1.0))
    throw std::invalid_argument("train: keep_prob_input must be in (0,1]");
  if (cfg.neg_samples_per_node < 0)
    throw std::invalid_argument("train: neg_samples_per_node must be >= 0");
  if (cfg.eta && !(*cfg.eta >= 0.0))
    throw std::invalid_argument("train: eta must be >= 0");
  if (!(cfg.weight_decay >= 0.0))
    throw std::invalid_argument("train: weight_decay must be >= 0");
  if (!(cfg.convergence_tol >= 0.0))
    throw std::invalid_argument("train: convergence_tol must be >= 0");
  if (cfg.rho < 0.0) throw std::invalid_argument("train: rho must be >= 0");
}

// One SGD step, applied in place. Reads from the cached forward/backward
// buffers only, so every write below sees the pre-step parameter values.
// Step rule per entry: theta -= lr * (grad + weight_decay * theta), decay on
// weight matrices only. Tied models route both weight roles into the shared
// matrix and keep the two views bitwise identical.
inline void apply_example_step(ModelParams& p, const ExampleForward& fwd,
                               double lr, double weight_decay) {
  const std::size_t k = static_cast<std::size_t>(p.latent_dim);

  if (weight_decay > 0.0) {
    const double shrink = 1.0 - lr * weight_decay;
    for (double& w : p.enc.data) w *= shrink;
    if (p.tied) {
      p.dec.data = p.enc.data;
    } else {
      for (double& w : p.dec.data) w *= shrink;
    }
  }

  // Encoder-role updates land on enc; decoder-role updates on dec. With tied
  // weights both land on the same logical matrix, so each write is mirrored.
  auto add_enc = [&](NodeId m, const std::vector<double>& v, double scale) {
    auto row = p.enc.row(static_cast<std::size_t>(m));
    for (std::size_t u = 0; u < k; ++u) row[u] -= lr * scale * v[u];
    if (p.tied) {
      auto mirror = p.dec.row(static_cast<std::size_t>(m));
      for (std::size_t u = 0; u < k; ++u) mirror[u] = row[u];
    }
  };
  auto add_dec = [&](NodeId j, const std::vector<double>& v, double scale) {
    auto row = p.dec.row(static_cast<std::size_t>(j));
    for (std::size_t u = 0; u < k; ++u) row[u] -= lr * scale * v[u];
    if (p.tied) {
      auto mirror = p.enc.row(static_cast<std::size_t>(j));
      for (std::size_t u = 0; u < k; ++u) mirror[u] = row[u];
    }
  };

  if (has_ae_branch(p.variant)) {
    for (std::size_t t = 0; t < fwd.outputs.size(); ++t) {
      const double d = fwd.ae_delta[t];
      if (d == 0.0) continue;
      add_dec(fwd.outputs[t], fwd.ae_masked, d);
      p.ae_output_bias[static_cast<std::size_t>(fwd.outputs[t])] -= lr * d;
    }
    for (std::size_t u = 0; u < k; ++u)
      p.ae_hidden_bias[u] -= lr * fwd.ae_back[u];
    for (NodeId m : fwd.active_inputs) add_enc(m, fwd.ae_back, 1.0);
  }
  if (has_mf_branch(p.variant)) {
    for (std::size_t t = 0; t < fwd.outputs.size(); ++t) {
      const double d = fwd.mf_delta[t];
      if (d == 0.0) continue;
      add_dec(fwd.outputs[t], fwd.mf_masked, d);
      p.mf_output_bias[static_cast<std::size_t>(fwd.outputs[t])] -= lr * d;
    }
    for (std::size_t u = 0; u < k; ++u)
      p.mf_hidden_bias[u] -= lr * fwd.mf_back[u];
    add_enc(fwd.node, fwd.mf_back, 1.0);
  }
}

inline bool params_finite(const ModelParams& p) {
  return all_finite(p.enc) && all_finite(p.dec) &&
         all_finite(std::span<const double>(p.ae_hidden_bias)) &&
         all_finite(std::span<const double>(p.ae_output_bias)) &&
         all_finite(std::span<const double>(p.mf_hidden_bias)) &&
         all_finite(std::span<const double>(p.mf_output_bias));
}

}  // namespace detail

/// Trains `params` on the train graph. Per epoch, nodes are visited in a
/// seeded random permutation; per node, negative samples and fresh dropout
/// masks are drawn (the hidden mask is shared by both branches, the input
/// mask feeds the autoencoder only) and one SGD step is applied. Stops when
/// the relative change of the mean epoch loss falls below convergence_tol or
/// after max_epochs. Identical seeds give identical parameter streams.
inline std::pair<ModelParams, TrainReport> train(ModelParams params,
                                                 const SparseGraph& g,
                                                 const TrainConfig& cfg,
                                                 const ExampleObserver& observer = {}) {
  detail::validate_config(cfg);
  if (g.num_nodes() != params.num_nodes())
    throw std::invalid_argument("train: graph/model node count mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  params.keep_hidden = cfg.keep_prob_hidden;
  params.keep_input = cfg.keep_prob_input;
  params.rho = cfg.rho;

  const NodeId n = g.num_nodes();
  const bool needs_input_mask = has_ae_branch(params.variant);
  RngState rng(cfg.seed);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  detail::ExampleForward fwd;
  DropoutMasks masks;
  double eta_sum = 0.0;
  std::size_t eta_count = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t visited = 0;

    for (NodeId i : order) {
      const std::size_t deg = static_cast<std::size_t>(g.degree(i));
      // Isolated nodes carry no positive signal; under automatic
      // reweighting their negative terms have weight 0, so skip them.
      if (deg == 0 && !cfg.eta) continue;

      const std::size_t want =
          cfg.neg_samples_per_node > 0
              ? static_cast<std::size_t>(cfg.neg_samples_per_node)
              : 5 * deg;
      const std::vector<NodeId> negatives = sample_non_links(g, i, want, rng);
      if (deg == 0 && negatives.empty()) continue;

      double eta = 0.0;
      if (cfg.eta) {
        eta = *cfg.eta;
      } else if (!negatives.empty()) {
        eta = compute_eta(deg, negatives.size());
      }

      masks.hidden = bernoulli_mask(static_cast<std::size_t>(params.latent_dim),
                                    cfg.keep_prob_hidden, rng);
      if (needs_input_mask)
        masks.input = bernoulli_mask(static_cast<std::size_t>(n),
                                     cfg.keep_prob_input, rng);

      detail::forward_example(params, g, i, negatives, masks, eta, fwd);
      detail::backward_example(params, masks, fwd);
      detail::apply_example_step(params, fwd, cfg.learning_rate, cfg.weight_decay);

      if (observer) observer(epoch, i, masks, negatives, eta);
      loss_sum += fwd.loss;
      ++visited;
      if (epoch == 1) {
        eta_sum += eta;
        ++eta_count;
      }
    }

    const double mean_loss = visited > 0 ? loss_sum / static_cast<double>(visited) : 0.0;
    report.epoch_losses.push_back(mean_loss);
    report.epochs_run = epoch;

    if (!std::isfinite(mean_loss) || !detail::params_finite(params))
      throw DivergenceError(
          "train: non-finite parameters at epoch " + std::to_string(epoch) +
          "; reduce the learning rate");

    if (epoch >= 2) {
      const double prev = report.epoch_losses[static_cast<std::size_t>(epoch) - 2];
      const double change = std::abs(mean_loss - prev);
      if (change <= cfg.convergence_tol * std::max(std::abs(prev), 1e-12)) {
        report.converged = true;
        break;
      }
    }
  }

  report.eta_used = eta_count > 0 ? eta_sum / static_cast<double>(eta_count) : 0.0;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(params), std::move(report)};
}

/// Central-difference check of example_gradient on one example with fixed
/// masks, negatives, and eta. Every free parameter is perturbed by +-epsilon
/// (tied models perturb the shared matrix once, mirroring both views).
/// Returns the maximum relative error
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
inline double gradient_check(const ModelParams& params, const SparseGraph& g,
                             NodeId i, std::span<const NodeId> negatives,
                             const DropoutMasks& masks, double eta,
                             double epsilon = 1e-5) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gradient_check: epsilon <= 0");
  ModelParams p = params;
  const Gradients grad = example_gradient(p, g, i, negatives, masks, eta);

  double max_err = 0.0;
  auto probe = [&](double* slot, double* mirror, double analytic) {
    const double saved = *slot;
    *slot = saved + epsilon;
    if (mirror) *mirror = *slot;
    const double up = example_loss(p, g, i, negatives, masks, eta);
    *slot = saved - epsilon;
    if (mirror) *mirror = *slot;
    const double down = example_loss(p, g, i, negatives, masks, eta);
    *slot = saved;
    if (mirror) *mirror = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    max_err = std::max(max_err, err);
  };

  for (std::size_t t = 0; t < p.enc.data.size(); ++t)
    probe(&p.enc.data[t], p.tied ? &p.dec.data[t] : nullptr, grad.enc.data[t]);
  if (!p.tied)
    for (std::size_t t = 0; t < p.dec.data.size(); ++t)
      probe(&p.dec.data[t], nullptr, grad.dec.data[t]);
  for (std::size_t t = 0; t < p.ae_hidden_bias.size(); ++t)
    probe(&p.ae_hidden_bias[t], nullptr, grad.ae_hidden_bias[t]);
  for (std::size_t t = 0; t < p.ae_output_bias.size(); ++t)
    probe(&p.ae_output_bias[t], nullptr, grad.ae_output_bias[t]);
  for (std::size_t t = 0; t < p.mf_hidden_bias.size(); ++t)
    probe(&p.mf_hidden_bias[t], nullptr, grad.mf_hidden_bias[t]);
  for (std::size_t t = 0; t < p.mf_output_bias.size(); ++t)
    probe(&p.mf_output_bias[t], nullptr, grad.mf_output_bias[t]);
  return max_err;
}

}  // namespace linkpred
