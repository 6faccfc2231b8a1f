#pragma once

// Training-free scoring baselines: Adamic-Adar common-neighbor weighting and
// random walk with restart.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

/// Scores of one source node against every node in the graph.
struct ScoreVector {
  NodeId source = -1;
  std::vector<double> scores;
};

/// Adamic-Adar: score(i, j) = sum over common neighbors n of 1 / ln(deg(n)).
/// Any common neighbor of two distinct nodes has degree >= 2, so the weight
/// is finite and positive. score(i, i) is fixed to 0.
inline ScoreVector adamic_adar_scores(const SparseGraph& g, NodeId i) {
  ScoreVector out;
  out.source = i;
  out.scores.assign(static_cast<std::size_t>(g.num_nodes()), 0.0);
  for (NodeId n : g.neighbors(i)) {
    if (g.degree(n) < 2) continue;  // only neighbor is i itself
    const double w = 1.0 / std::log(static_cast<double>(g.degree(n)));
    for (NodeId j : g.neighbors(n)) {
      if (j == i) continue;
      out.scores[static_cast<std::size_t>(j)] += w;
    }
  }
  return out;
}

/// Random walk with restart from node i: the stationary point of
///   pi = restart * delta_i + (1 - restart) * P^T pi
/// where P row-normalizes the adjacency matrix and a zero-degree row
/// restarts to the source. Solved by power iteration on the L1 distance;
/// throws after `max_iterations` non-converged sweeps.
inline ScoreVector rwr_scores(const SparseGraph& g, NodeId i,
                              double restart = 0.5, double tolerance = 1e-10,
                              int max_iterations = 10000) {
  if (!(restart > 0.0 && restart <= 1.0))
    throw std::invalid_argument("rwr: restart must be in (0,1]");
  if (!(tolerance > 0.0)) throw std::invalid_argument("rwr: tolerance must be > 0");
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  if (i < 0 || static_cast<std::size_t>(i) >= n)
    throw std::out_of_range("rwr: source out of range");

  std::vector<double> cur(n, 0.0), next(n), contrib(n);
  cur[static_cast<std::size_t>(i)] = 1.0;
  const double damp = 1.0 - restart;

  for (int it = 0; it < max_iterations; ++it) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      const NodeId d = g.degree(static_cast<NodeId>(u));
      if (d == 0) {
        contrib[u] = 0.0;
        dangling += cur[u];
      } else {
        contrib[u] = cur[u] / static_cast<double>(d);
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      double mass = 0.0;
      for (NodeId u : g.neighbors(static_cast<NodeId>(j))) mass += contrib[u];
      next[j] = damp * mass;
    }
    next[static_cast<std::size_t>(i)] += restart + damp * dangling;

    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) delta += std::abs(next[j] - cur[j]);
    cur.swap(next);
    if (delta < tolerance) {
      ScoreVector out;
      out.source = i;
      out.scores = std::move(cur);
      return out;
    }
  }
  throw std::runtime_error("rwr: no convergence within " +
                           std::to_string(max_iterations) + " iterations");
}

}  // namespace linkpred
