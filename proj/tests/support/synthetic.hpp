// Deterministic synthetic instances shared by the test suites.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/model.hpp"
#include "linkpred/numerics.hpp"

namespace synthetic {

using linkpred::DenseMatrix;
using linkpred::NodeId;
using linkpred::SparseGraph;

/// Erdos-Renyi graph on n nodes with edge probability p.
inline SparseGraph random_graph(NodeId n, double p, std::uint64_t seed) {
  linkpred::RngState rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.next_double() < p) edges.push_back({i, j});
  return SparseGraph::from_edges(n, edges);
}

/// Planted-partition graph: `communities` equal blocks, within-block edge
/// probability p_in, across-block probability p_out.
inline SparseGraph planted_partition(NodeId n, int communities, double p_in,
                                     double p_out, std::uint64_t seed) {
  if (communities < 1 || n % communities != 0)
    throw std::invalid_argument("planted_partition: n must split evenly");
  const NodeId block = n / communities;
  linkpred::RngState rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = (i / block == j / block) ? p_in : p_out;
      if (rng.next_double() < p) edges.push_back({i, j});
    }
  return SparseGraph::from_edges(n, edges);
}

/// Two disjoint cliques of size `half` bridged by a single edge. Easy
/// structure: training loss should fall and within-clique pairs should be
/// scored above cross-clique pairs.
inline SparseGraph two_cliques(NodeId half) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < half; ++i)
    for (NodeId j = i + 1; j < half; ++j) {
      edges.push_back({i, j});
      edges.push_back({static_cast<NodeId>(half + i), static_cast<NodeId>(half + j)});
    }
  edges.push_back({static_cast<NodeId>(half - 1), half});
  return SparseGraph::from_edges(2 * half, edges);
}

/// Model with every weight and bias drawn uniform(-range, range); used where
/// tests need nonzero parameters with no special structure.
inline linkpred::ModelParams random_params(linkpred::ModelVariant variant, int k,
                                           NodeId n, bool tied, double rho,
                                           std::uint64_t seed, double range = 0.5) {
  linkpred::ModelParams p =
      linkpred::ModelParams::init(variant, k, n, tied, rho, seed);
  linkpred::RngState rng(seed + 1000003);
  for (double& v : p.enc.data) v = rng.next_uniform(-range, range);
  if (tied) {
    p.dec.data = p.enc.data;
  } else {
    for (double& v : p.dec.data) v = rng.next_uniform(-range, range);
  }
  for (double& v : p.ae_hidden_bias) v = rng.next_uniform(-range, range);
  for (double& v : p.ae_output_bias) v = rng.next_uniform(-range, range);
  for (double& v : p.mf_hidden_bias) v = rng.next_uniform(-range, range);
  for (double& v : p.mf_output_bias) v = rng.next_uniform(-range, range);
  return p;
}

/// Random 0/1 symmetric hollow matrix, the dense picture of a graph.
inline DenseMatrix random_adjacency(std::size_t n, double density,
                                    std::uint64_t seed) {
  linkpred::RngState rng(seed);
  DenseMatrix a(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.next_double() < density) a(i, j) = a(j, i) = 1.0;
  return a;
}

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, double range,
                                 std::uint64_t seed) {
  linkpred::RngState rng(seed);
  DenseMatrix m(rows, cols);
  for (double& v : m.data) v = rng.next_uniform(-range, range);
  return m;
}

}  // namespace synthetic
