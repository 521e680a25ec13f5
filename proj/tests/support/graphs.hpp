#pragma once

#include <random>

#include "discordq/louvain.hpp"
#include "support/oracles.hpp"

namespace testgraphs {

struct Instance {
  oracle::Matrix adjacency;
  discordq::WeightedGraph graph;
};

inline Instance from_matrix(const oracle::Matrix& a) {
  Instance inst{a, discordq::WeightedGraph(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (a[i][j] > 0) inst.graph.add_edge(i, j, a[i][j]);
  return inst;
}

// Random connected weighted graph: a random spanning tree plus extra edges.
inline Instance random_connected(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> w(0.05, 1.0), coin(0.0, 1.0);
  oracle::Matrix a(n, std::vector<double>(n, 0.0));
  for (std::size_t v = 1; v < n; ++v) {
    std::size_t u = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    a[u][v] = a[v][u] = w(rng);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (a[i][j] == 0 && coin(rng) < density) a[i][j] = a[j][i] = w(rng);
  return from_matrix(a);
}

// Disjoint cliques of the given sizes, nodes shuffled.
inline std::pair<Instance, std::vector<int>> disjoint_cliques(std::mt19937_64& rng, const std::vector<std::size_t>& sizes) {
  std::vector<int> truth;
  for (std::size_t c = 0; c < sizes.size(); ++c)
    for (std::size_t k = 0; k < sizes[c]; ++k) truth.push_back(static_cast<int>(c));
  std::shuffle(truth.begin(), truth.end(), rng);
  std::size_t n = truth.size();
  std::uniform_real_distribution<double> w(0.5, 1.0);
  oracle::Matrix a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (truth[i] == truth[j]) a[i][j] = a[j][i] = w(rng);
  return {from_matrix(a), truth};
}

// True when two labelings induce the same partition.
inline bool same_partition(const std::vector<int>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if ((x[i] == x[j]) != (y[i] == y[j])) return false;
  return true;
}

}  // namespace testgraphs
