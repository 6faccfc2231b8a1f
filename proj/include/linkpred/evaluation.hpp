#pragma once

// Candidate-restricted ranking evaluation. For each node the candidate set
// is its 2-hop neighborhood in the train graph; candidates adjacent in the
// test graph are the positives. Reports precision@k and pairwise AUC,
// macro-averaged over nodes that have at least one positive and one negative
// candidate. Also renders thresholded score matrices as PGM images.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

/// Fraction of the first min(k, |ranked|) entries that are in `truth`,
/// with the denominator fixed at k.
inline double precision_at_k(std::span<const NodeId> ranked,
                             const std::unordered_set<NodeId>& truth, int k) {
  if (k < 1) throw std::invalid_argument("precision_at_k: k must be >= 1");
  const std::size_t take = std::min(ranked.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t t = 0; t < take; ++t)
    if (truth.count(ranked[t])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

/// Probability that a uniformly drawn positive outscores a uniformly drawn
/// negative, ties counting 1/2. Computed via midranks, which is exact for
/// the pair-counting definition. Returns nullopt when either class is empty.
inline std::optional<double> auc_pairwise(std::span<const double> scores,
                                          std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc_pairwise: size mismatch");
  const std::size_t n = scores.size();
  std::size_t num_pos = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (labels[t]) ++num_pos;
  const std::size_t num_neg = n - num_pos;
  if (num_pos == 0 || num_neg == 0) return std::nullopt;

  std::vector<std::size_t> idx(n);
  for (std::size_t t = 0; t < n; ++t) idx[t] = t;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double pos_rank_sum = 0.0;
  std::size_t t = 0;
  while (t < n) {
    std::size_t e = t;
    while (e < n && scores[idx[e]] == scores[idx[t]]) ++e;
    // Ranks t+1 .. e share the midrank (t + e + 1) / 2.
    const double midrank = static_cast<double>(t + e + 1) / 2.0;
    for (std::size_t u = t; u < e; ++u)
      if (labels[idx[u]]) pos_rank_sum += midrank;
    t = e;
  }
  const double np = static_cast<double>(num_pos);
  const double wins = pos_rank_sum - np * (np + 1.0) / 2.0;
  return wins / (np * static_cast<double>(num_neg));
}

struct PerNodeEval {
  NodeId node = -1;
  double prec_at_k = 0.0;
  double auc = 0.0;
  int candidates = 0;
  int positives = 0;
};

struct EvalReport {
  double prec_at_k = 0.0;  // macro average
  double auc = 0.0;        // macro average
  int k = 10;
  int nodes_evaluated = 0;
  int nodes_skipped = 0;
  std::vector<PerNodeEval> per_node;  // filled only on request
};

/// A scorer returns the full score vector of a source node (length N).
using NodeScorer = std::function<std::vector<double>(NodeId)>;

/// Sorts candidate ids by descending score, breaking ties by ascending id.
inline std::vector<NodeId> rank_candidates(std::span<const NodeId> candidates,
                                           std::span<const double> scores) {
  if (candidates.size() != scores.size())
    throw std::invalid_argument("rank_candidates: size mismatch");
  std::vector<NodeId> ranked(candidates.begin(), candidates.end());
  std::vector<std::size_t> idx(candidates.size());
  for (std::size_t t = 0; t < idx.size(); ++t) idx[t] = t;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  for (std::size_t t = 0; t < idx.size(); ++t) ranked[t] = candidates[idx[t]];
  return ranked;
}

/// Runs the candidate-restricted protocol over every node. Nodes whose
/// candidate set lacks a test-edge endpoint or a non-edge are skipped and
/// counted. The scorer is called once per evaluated node.
inline EvalReport evaluate(const NodeScorer& scorer, const SplitResult& split,
                           int k = 10, bool keep_per_node = false) {
  if (k < 1) throw std::invalid_argument("evaluate: k must be >= 1");
  if (split.train.num_nodes() != split.test.num_nodes())
    throw std::invalid_argument("evaluate: train/test node count mismatch");
  const NodeId n = split.train.num_nodes();

  EvalReport report;
  report.k = k;
  double prec_sum = 0.0, auc_sum = 0.0;

  for (NodeId i = 0; i < n; ++i) {
    const std::vector<NodeId> candidates = two_hop_candidates(split.train, i);
    std::size_t num_pos = 0;
    for (NodeId j : candidates)
      if (split.test.has_edge(i, j)) ++num_pos;
    if (num_pos == 0 || num_pos == candidates.size()) {
      ++report.nodes_skipped;
      continue;
    }

    const std::vector<double> full = scorer(i);
    if (full.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("evaluate: scorer returned wrong length");

    std::vector<double> cand_scores(candidates.size());
    std::vector<std::uint8_t> cand_labels(candidates.size());
    std::unordered_set<NodeId> truth;
    for (std::size_t t = 0; t < candidates.size(); ++t) {
      cand_scores[t] = full[static_cast<std::size_t>(candidates[t])];
      cand_labels[t] = split.test.has_edge(i, candidates[t]) ? 1 : 0;
      if (cand_labels[t]) truth.insert(candidates[t]);
    }

    const std::vector<NodeId> ranked = rank_candidates(candidates, cand_scores);
    const double prec = precision_at_k(ranked, truth, k);
    const auto auc = auc_pairwise(cand_scores, cand_labels);
    // Both classes are present, so the AUC is defined.
    prec_sum += prec;
    auc_sum += *auc;
    ++report.nodes_evaluated;
    if (keep_per_node) {
      report.per_node.push_back({i, prec, *auc,
                                 static_cast<int>(candidates.size()),
                                 static_cast<int>(num_pos)});
    }
  }

  if (report.nodes_evaluated > 0) {
    report.prec_at_k = prec_sum / static_cast<double>(report.nodes_evaluated);
    report.auc = auc_sum / static_cast<double>(report.nodes_evaluated);
  }
  return report;
}

/// Renders the thresholded score matrix as a binary (P5) PGM image, sampling
/// every `stride`-th row and column: score > threshold paints a black pixel,
/// everything else white. Returns the complete file bytes.
inline std::vector<std::uint8_t> render_adjacency(const NodeScorer& scorer,
                                                  NodeId num_nodes,
                                                  double threshold = 0.5,
                                                  int stride = 5) {
  if (stride < 1) throw std::invalid_argument("render: stride must be >= 1");
  if (num_nodes < 1) throw std::invalid_argument("render: empty matrix");
  const std::size_t side =
      (static_cast<std::size_t>(num_nodes) + static_cast<std::size_t>(stride) - 1) /
      static_cast<std::size_t>(stride);

  std::string header = "P5\n" + std::to_string(side) + " " +
                       std::to_string(side) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + side * side);
  for (NodeId r = 0; r < num_nodes; r += stride) {
    const std::vector<double> row = scorer(r);
    if (row.size() != static_cast<std::size_t>(num_nodes))
      throw std::invalid_argument("render: scorer returned wrong length");
    for (NodeId c = 0; c < num_nodes; c += stride)
      bytes.push_back(row[static_cast<std::size_t>(c)] > threshold ? 0 : 255);
  }
  return bytes;
}

}  // namespace linkpred
