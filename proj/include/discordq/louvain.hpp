#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace discordq {

// Undirected weighted graph on nodes 0..n-1. Parallel edges accumulate.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n = 0) : adj_(n), self_(n, 0.0) {}

  std::size_t size() const { return adj_.size(); }
  void add_edge(std::size_t u, std::size_t v, double w);
  /// Neighbours of u in ascending node order, excluding u itself.
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t u) const {
    return adj_[u];
  }
  /// Self-loop weight of u, counted once in its degree per endpoint, i.e.
  /// degree(u) = 2 * self_loop(u) + sum of incident edge weights.
  double self_loop(std::size_t u) const { return self_[u]; }
  double degree(std::size_t u) const;
  double total_weight() const;  // sum of edge weights (m)

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
  std::vector<double> self_;
};

struct LouvainOptions {
  double resolution = 1.0;
  // Final single-node moving pass on the original graph after aggregation
  // has converged.
  bool refine = true;  // final node moves and community merges on the input graph
  std::size_t restarts = 16;  // visit orders tried; the first is index order
  std::uint64_t seed = 0x5eed;
  std::size_t resplit_max_nodes = 100;  // split and lookahead moves above this size are skipped
  std::size_t max_levels = 64;
};

/// Newman modularity of a labelling (labels arbitrary non-negative ints).
/// 0 for a graph without edges.
double modularity(const WeightedGraph& g, std::span<const int> labels, double resolution = 1.0);

/// Multi-level Louvain with deterministic visit order (node index order).
/// Returns community labels numbered by first appearance (node 0 is in 0).
std::vector<int> louvain(const WeightedGraph& g, const LouvainOptions& opts = {});

}  // namespace discordq
