#pragma once

// Sparse undirected graph storage plus the dataset-side operations: edge-list
// parsing, train/test edge splits, 2-hop candidate generation, negative
// sampling, and dense-subgraph extraction (k-core + largest component).

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linkpred/numerics.hpp"

namespace linkpred {

using NodeId = std::int32_t;

/// Failure while reading an edge-list file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Undirected graph over dense node ids [0, N) with sorted adjacency lists.
///
/// Nodes keep the original integer label they carried in the source file;
/// graphs built programmatically default to identity labels.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Builds the symmetric closure of `edges`. Self-loops are dropped and
  /// duplicate edges collapse to one.
  static SparseGraph from_edges(NodeId num_nodes,
                                std::span<const std::pair<NodeId, NodeId>> edges,
                                std::vector<long long> labels = {}) {
    if (num_nodes < 0)
      throw std::invalid_argument("from_edges: negative node count");
    SparseGraph g;
    g.adj_.resize(static_cast<std::size_t>(num_nodes));
    if (labels.empty()) {
      g.labels_.resize(static_cast<std::size_t>(num_nodes));
      for (NodeId i = 0; i < num_nodes; ++i) g.labels_[i] = i;
    } else {
      if (labels.size() != static_cast<std::size_t>(num_nodes))
        throw std::invalid_argument("from_edges: label count != node count");
      g.labels_ = std::move(labels);
    }
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
        throw std::invalid_argument("from_edges: endpoint out of range");
      if (u == v) continue;
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
    }
    g.num_edges_ = 0;
    for (auto& list : g.adj_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      g.num_edges_ += list.size();
    }
    g.num_edges_ /= 2;
    for (NodeId i = 0; i < num_nodes; ++i) g.label_index_[g.labels_[i]] = i;
    return g;
  }

  NodeId num_nodes() const { return static_cast<NodeId>(adj_.size()); }
  std::size_t num_edges() const { return num_edges_; }

  NodeId degree(NodeId i) const {
    return static_cast<NodeId>(adj_[check(i)].size());
  }

  const std::vector<NodeId>& neighbors(NodeId i) const { return adj_[check(i)]; }

  bool has_edge(NodeId i, NodeId j) const {
    const auto& list = adj_[check(i)];
    return std::binary_search(list.begin(), list.end(), check(j));
  }

  long long label(NodeId i) const { return labels_[check(i)]; }
  const std::vector<long long>& labels() const { return labels_; }

  std::optional<NodeId> index_of(long long label) const {
    auto it = label_index_.find(label);
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
  }

  /// All edges as (i, j) with i < j, in ascending lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(num_edges_);
    for (NodeId i = 0; i < num_nodes(); ++i)
      for (NodeId j : adj_[i])
        if (j > i) out.emplace_back(i, j);
    return out;
  }

  /// Checks the structural invariants (symmetry, sorted unique lists, no
  /// self-loops, edge count, label table). Throws std::logic_error on the
  /// first violation.
  void validate() const {
    const NodeId n = num_nodes();
    if (labels_.size() != adj_.size())
      throw std::logic_error("graph: label count != node count");
    std::size_t half_edges = 0;
    for (NodeId i = 0; i < n; ++i) {
      const auto& list = adj_[i];
      for (std::size_t t = 0; t < list.size(); ++t) {
        const NodeId j = list[t];
        if (j < 0 || j >= n) throw std::logic_error("graph: neighbor out of range");
        if (j == i) throw std::logic_error("graph: self-loop");
        if (t > 0 && list[t - 1] >= j)
          throw std::logic_error("graph: adjacency list not strictly increasing");
        if (!has_edge(j, i)) throw std::logic_error("graph: asymmetric edge");
      }
      half_edges += list.size();
    }
    if (half_edges != 2 * num_edges_)
      throw std::logic_error("graph: edge count mismatch");
    for (NodeId i = 0; i < n; ++i) {
      auto it = label_index_.find(labels_[i]);
      if (it == label_index_.end() || it->second != i)
        throw std::logic_error("graph: label index mismatch");
    }
  }

 private:
  NodeId check(NodeId i) const {
    if (i < 0 || static_cast<std::size_t>(i) >= adj_.size())
      throw std::out_of_range("graph: node id out of range");
    return i;
  }

  std::vector<std::vector<NodeId>> adj_;
  std::vector<long long> labels_;
  std::unordered_map<long long, NodeId> label_index_;
  std::size_t num_edges_ = 0;
};

namespace detail {

// Shared tokenizer state so several files can be parsed into one label space.
struct EdgeScan {
  std::vector<long long> labels;
  std::unordered_map<long long, NodeId> index;

  NodeId intern(long long label) {
    auto [it, fresh] = index.try_emplace(
        label, static_cast<NodeId>(labels.size()));
    if (fresh) labels.push_back(label);
    return it->second;
  }

  /// Appends the edges of one stream.  Lines starting with '#' (after
  /// leading blanks) and blank lines are skipped; every other line must hold
  /// exactly two integer labels.
  void scan(std::istream& in, std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const char* p = line.data();
      const char* end = p + line.size();
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end || *p == '#') continue;

      long long values[2];
      for (int t = 0; t < 2; ++t) {
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p == end)
          throw ParseError("expected two integer labels", line_no);
        auto [next, ec] = std::from_chars(p, end, values[t]);
        if (ec != std::errc() ||
            (next < end && *next != ' ' && *next != '\t'))
          throw ParseError("malformed integer label", line_no);
        p = next;
      }
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p != end) throw ParseError("trailing tokens after edge", line_no);
      // Two statements: first-appearance id order must follow token order,
      // and argument evaluation order is unspecified.
      const NodeId a = intern(values[0]);
      const NodeId b = intern(values[1]);
      edges.emplace_back(a, b);
    }
  }
};

}  // namespace detail

/// Parses a whitespace-separated edge list ('#' comment lines allowed).
/// Labels are remapped to dense ids in first-appearance order; self-loops
/// and duplicate edges are dropped silently.
inline SparseGraph parse_edge_list(std::istream& in) {
  detail::EdgeScan scan;
  std::vector<std::pair<NodeId, NodeId>> edges;
  scan.scan(in, edges);
  // Take the size before the move: argument evaluation order is unspecified.
  const NodeId n = static_cast<NodeId>(scan.labels.size());
  return SparseGraph::from_edges(n, edges, std::move(scan.labels));
}

inline SparseGraph parse_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  try {
    return parse_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

/// Parses two edge lists into one shared label space, so the returned graphs
/// have identical node counts and id assignments. Needed when a train/test
/// pair is re-read from disk: a node that only carries test edges must still
/// exist (isolated) in the train graph.
inline std::pair<SparseGraph, SparseGraph> load_graph_pair(
    const std::string& first_path, const std::string& second_path) {
  detail::EdgeScan scan;
  std::vector<std::pair<NodeId, NodeId>> first_edges, second_edges;
  for (int which = 0; which < 2; ++which) {
    const std::string& path = which == 0 ? first_path : second_path;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    try {
      scan.scan(in, which == 0 ? first_edges : second_edges);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), e.line());
    }
  }
  const NodeId n = static_cast<NodeId>(scan.labels.size());
  auto first = SparseGraph::from_edges(n, first_edges, scan.labels);
  auto second = SparseGraph::from_edges(n, second_edges, std::move(scan.labels));
  return {std::move(first), std::move(second)};
}

/// Writes one "label label" line per edge (i < j order). parse_edge_list on
/// the output reconstructs the graph.
inline void write_edge_list(const SparseGraph& g, std::ostream& out) {
  out << "# undirected edge list: " << g.num_nodes() << " nodes, "
      << g.num_edges() << " edges\n";
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (NodeId j : g.neighbors(i))
      if (j > i) out << g.label(i) << '\t' << g.label(j) << '\n';
}

struct SplitResult {
  SparseGraph train;
  SparseGraph test;
  std::uint64_t seed = 0;
};

/// Uniformly random edge partition: exactly round(train_fraction * |E|)
/// edges land in the train graph, the rest in the test graph. Both parts
/// keep the full node set and labels. Deterministic for a fixed seed.
inline SplitResult split_train_test(const SparseGraph& g, double train_fraction,
                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw std::invalid_argument("split: train_fraction must be in (0,1]");
  auto edges = g.edges();
  RngState rng(seed);
  rng.shuffle(edges);
  const auto take = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(edges.size())));
  std::span<const std::pair<NodeId, NodeId>> all(edges);
  SplitResult r;
  r.train = SparseGraph::from_edges(g.num_nodes(), all.first(take), g.labels());
  r.test = SparseGraph::from_edges(g.num_nodes(), all.subspan(take), g.labels());
  r.seed = seed;
  return r;
}

/// Nodes at distance exactly 2 from i: neighbors-of-neighbors that are not i
/// itself and not already adjacent to i. Sorted ascending.
inline std::vector<NodeId> two_hop_candidates(const SparseGraph& g, NodeId i) {
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(g.num_nodes()), 0);
  blocked[i] = 1;
  for (NodeId n : g.neighbors(i)) blocked[n] = 1;
  std::vector<NodeId> out;
  for (NodeId n : g.neighbors(i)) {
    for (NodeId j : g.neighbors(n)) {
      if (!blocked[j]) {
        blocked[j] = 1;
        out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Samples `count` distinct non-neighbors of i (excluding i) uniformly at
/// random. Returns every non-neighbor when fewer than `count` exist.
inline std::vector<NodeId> sample_non_links(const SparseGraph& g, NodeId i,
                                            std::size_t count, RngState& rng) {
  const NodeId n = g.num_nodes();
  const auto& nbrs = g.neighbors(i);
  const std::size_t eligible =
      static_cast<std::size_t>(n) - 1 - nbrs.size();
  if (count == 0 || eligible == 0) return {};

  auto is_link = [&](NodeId j) {
    return std::binary_search(nbrs.begin(), nbrs.end(), j);
  };

  if (count >= eligible) {
    std::vector<NodeId> all;
    all.reserve(eligible);
    for (NodeId j = 0; j < n; ++j)
      if (j != i && !is_link(j)) all.push_back(j);
    return all;
  }

  if (2 * count >= eligible) {
    // Dense request: enumerate and take a partial Fisher-Yates prefix.
    std::vector<NodeId> pool;
    pool.reserve(eligible);
    for (NodeId j = 0; j < n; ++j)
      if (j != i && !is_link(j)) pool.push_back(j);
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t j = t + static_cast<std::size_t>(
                                    rng.next_below(pool.size() - t));
      std::swap(pool[t], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

  // Sparse request: rejection sampling.
  std::vector<NodeId> out;
  out.reserve(count);
  while (out.size() < count) {
    const NodeId j = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(n)));
    if (j == i || is_link(j)) continue;
    if (std::find(out.begin(), out.end(), j) != out.end()) continue;
    out.push_back(j);
  }
  return out;
}

/// Iterative min-degree peeling to the `min_core`-core, then the largest
/// connected component of what survives, reindexed to dense ids (ascending
/// original id order). Original labels are carried over.
inline SparseGraph extract_dense_subgraph(const SparseGraph& g, NodeId min_core) {
  if (min_core < 1)
    throw std::invalid_argument("extract_dense_subgraph: min_core must be >= 1");
  const NodeId n = g.num_nodes();
  std::vector<NodeId> deg(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(n), 1);
  std::queue<NodeId> doomed;
  for (NodeId i = 0; i < n; ++i) {
    deg[i] = g.degree(i);
    if (deg[i] < min_core) {
      alive[i] = 0;
      doomed.push(i);
    }
  }
  while (!doomed.empty()) {
    const NodeId u = doomed.front();
    doomed.pop();
    for (NodeId v : g.neighbors(u)) {
      if (!alive[v]) continue;
      if (--deg[v] < min_core) {
        alive[v] = 0;
        doomed.push(v);
      }
    }
  }

  // Largest connected component among survivors; ties go to the component
  // containing the smallest node id (first found).
  std::vector<NodeId> component(static_cast<std::size_t>(n), -1);
  NodeId best_root = -1;
  std::size_t best_size = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (!alive[s] || component[s] >= 0) continue;
    std::size_t size = 0;
    component[s] = s;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId v : g.neighbors(u)) {
        if (alive[v] && component[v] < 0) {
          component[v] = s;
          stack.push_back(v);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_root = s;
    }
  }
  if (best_root < 0)
    throw std::runtime_error(
        "extract_dense_subgraph: no node survives min_core=" +
        std::to_string(min_core));

  std::vector<NodeId> remap(static_cast<std::size_t>(n), -1);
  std::vector<long long> labels;
  labels.reserve(best_size);
  NodeId next = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (alive[i] && component[i] == best_root) {
      remap[i] = next++;
      labels.push_back(g.label(i));
    }
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i) {
    if (remap[i] < 0) continue;
    for (NodeId j : g.neighbors(i))
      if (j > i && remap[j] >= 0) edges.emplace_back(remap[i], remap[j]);
  }
  return SparseGraph::from_edges(next, edges, std::move(labels));
}

}  // namespace linkpred
