#include "discordq/louvain.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

namespace discordq {
namespace {

constexpr double kMinGain = 1e-12;

std::vector<int> renumber(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, _] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

// Repeated passes of single-node moves in `order` until a pass moves
// nothing. `labels` is updated in place; returns whether any node moved.
bool local_moving(const WeightedGraph& g, std::vector<int>& labels, double resolution,
                  std::span<const std::size_t> order) {
  const std::size_t n = g.size();
  const double m2 = 2.0 * g.total_weight();
  if (m2 <= 0.0) return false;

  std::vector<double> degree(n);
  std::vector<double> tot(n, 0.0);  // sum of degrees per community
  std::vector<std::size_t> members(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    degree[u] = g.degree(u);
    tot[static_cast<std::size_t>(labels[u])] += degree[u];
    ++members[static_cast<std::size_t>(labels[u])];
  }

  bool moved_any = false;
  std::map<int, double> links;  // ordered: ties resolve to the lowest label
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t u : order) {
      const int own = labels[u];
      links.clear();
      links[own] = 0.0;
      for (const auto& [v, w] : g.neighbors(u)) links[labels[v]] += w;

      tot[static_cast<std::size_t>(own)] -= degree[u];
      --members[static_cast<std::size_t>(own)];
      const double scale = resolution * degree[u] / m2;
      int best = own;
      double best_gain = links[own] - scale * tot[static_cast<std::size_t>(own)];
      for (const auto& [c, k_in] : links) {
        double gain = k_in - scale * tot[static_cast<std::size_t>(c)];
        if (gain > best_gain + kMinGain) {
          best_gain = gain;
          best = c;
        }
      }
      // Leaving for an empty community has gain 0.
      if (best_gain < -kMinGain) {
        for (std::size_t c = 0; c < n; ++c) {
          if (members[c] == 0) {
            best = static_cast<int>(c);
            break;
          }
        }
      }
      tot[static_cast<std::size_t>(best)] += degree[u];
      ++members[static_cast<std::size_t>(best)];
      if (best != own) {
        labels[u] = best;
        moved = true;
        moved_any = true;
      }
    }
  }
  return moved_any;
}

WeightedGraph aggregate(const WeightedGraph& g, std::span<const int> labels, std::size_t k) {
  WeightedGraph out(k);
  for (std::size_t u = 0; u < g.size(); ++u) {
    auto cu = static_cast<std::size_t>(labels[u]);
    if (g.self_loop(u) != 0.0) out.add_edge(cu, cu, g.self_loop(u));
    for (const auto& [v, w] : g.neighbors(u)) {
      if (v < u) continue;  // each undirected edge once
      out.add_edge(cu, static_cast<std::size_t>(labels[v]), w);
    }
  }
  return out;
}

// Merges the pair of communities with the largest positive modularity gain
// until no merge helps. Returns whether anything merged.
bool merge_communities(const WeightedGraph& g, std::vector<int>& labels, double resolution) {
  const double m = g.total_weight();
  if (m <= 0.0) return false;
  bool merged_any = false;
  for (;;) {
    labels = renumber(labels);
    std::size_t k = labels.empty() ? 0 : static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    std::vector<double> tot(k, 0.0);
    std::map<std::pair<int, int>, double> between;
    for (std::size_t u = 0; u < g.size(); ++u) {
      tot[static_cast<std::size_t>(labels[u])] += g.degree(u);
      for (const auto& [v, w] : g.neighbors(u))
        if (v > u && labels[u] != labels[v])
          between[std::minmax(labels[u], labels[v])] += w;
    }
    // dQ of joining a and b = w_ab / m - resolution * tot_a * tot_b / (2 m^2)
    double best_gain = kMinGain;
    std::pair<int, int> best{-1, -1};
    for (const auto& [ab, w] : between) {
      double gain = w / m - resolution * tot[static_cast<std::size_t>(ab.first)] *
                                tot[static_cast<std::size_t>(ab.second)] / (2.0 * m * m);
      if (gain > best_gain) {
        best_gain = gain;
        best = ab;
      }
    }
    if (best.first < 0) return merged_any;
    for (auto& c : labels)
      if (c == best.second) c = best.first;
    merged_any = true;
  }
}

// Best bisection of community `c`: every member in turn seeds a new label,
// then members move between the two halves while that raises modularity.
// Node moves then settle the whole graph. Returns the best labeling found
// with its modularity (empty if none).
std::pair<std::vector<int>, double> bisect(const WeightedGraph& g, const std::vector<int>& labels, int c,
                                           std::span<const double> degree, double resolution) {
  const std::size_t n = g.size();
  const double m2 = 2.0 * g.total_weight();
  const int fresh = static_cast<int>(n);  // unused label
  std::vector<std::size_t> members;
  for (std::size_t u = 0; u < n; ++u)
    if (labels[u] == c) members.push_back(u);
  std::pair<std::vector<int>, double> best{{}, -1e300};
  if (members.size() < 2) return best;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t seed : members) {
    std::vector<int> trial = labels;
    trial[seed] = fresh;
    double tot[2] = {0.0, 0.0};  // degree sums of c and fresh
    for (std::size_t u : members) tot[trial[u] == fresh] += degree[u];
    for (bool moved = true; moved;) {
      moved = false;
      for (std::size_t u : members) {
        int side = trial[u] == fresh, other = 1 - side;
        double k[2] = {0.0, 0.0};
        for (const auto& [v, w] : g.neighbors(u))
          if (trial[v] == c || trial[v] == fresh) k[trial[v] == fresh] += w;
        double scale = resolution * degree[u] / m2;
        double stay = k[side] - scale * (tot[side] - degree[u]);
        double go = k[other] - scale * tot[other];
        if (go > stay + kMinGain) {
          trial[u] = other ? fresh : c;
          tot[side] -= degree[u];
          tot[other] += degree[u];
          moved = true;
        }
      }
    }
    if (tot[0] == 0.0 || tot[1] == 0.0) continue;
    // let the rest of the graph react before judging the split
    trial = renumber(trial);
    local_moving(g, trial, resolution, order);
    double q = modularity(g, trial, resolution);
    if (q > best.second) best = {std::move(trial), q};
  }
  return best;
}

// Splits a community in two, or re-splits the union of two adjacent
// communities, or forces one node across and lets the rest settle,
// whenever that raises modularity. Reaches partitions that
// single-node moves and merges cannot. Returns whether anything changed.
bool resplit_communities(const WeightedGraph& g, std::vector<int>& labels, double resolution) {
  const std::size_t n = g.size();
  if (g.total_weight() <= 0.0) return false;
  std::vector<double> degree(n);
  for (std::size_t u = 0; u < n; ++u) degree[u] = g.degree(u);
  bool changed = false;
  for (bool improved = true; improved;) {
    improved = false;
    labels = renumber(labels);
    const double base = modularity(g, labels, resolution);
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::set<std::pair<int, int>> adjacent;
    for (std::size_t u = 0; u < n; ++u)
      for (const auto& [v, _] : g.neighbors(u))
        if (labels[u] != labels[v]) adjacent.insert(std::minmax(labels[u], labels[v]));
    std::pair<std::vector<int>, double> best{{}, base + kMinGain};
    for (int c = 0; c < k; ++c) {
      auto trial = bisect(g, labels, c, degree, resolution);
      if (trial.second > best.second) best = std::move(trial);
    }
    for (const auto& [a, b] : adjacent) {
      std::vector<int> joined = labels;
      for (auto& x : joined)
        if (x == b) x = a;
      auto trial = bisect(g, joined, a, degree, resolution);
      if (trial.second > best.second) best = std::move(trial);
    }
    // forced single moves followed by settling: a one-step lookahead that
    // finds exchanges of two nodes between communities
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t u = 0; u < n; ++u) {
      std::set<int> targets;
      for (const auto& [v, _] : g.neighbors(u))
        if (labels[v] != labels[u]) targets.insert(labels[v]);
      for (int c : targets) {
        std::vector<int> trial = labels;
        trial[u] = c;
        trial = renumber(trial);
        local_moving(g, trial, resolution, order);
        double q = modularity(g, trial, resolution);
        if (q > best.second) best = {std::move(trial), q};
      }
    }
    if (!best.first.empty()) {
      labels = renumber(best.first);
      improved = changed = true;
    }
  }
  return changed;
}

// Deterministic permutation from a fixed-seed engine; avoids the
// library-specific distributions so orders match across toolchains.
std::vector<std::size_t> visit_order(std::size_t n, std::mt19937_64* rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (rng)
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[(*rng)() % i]);
  return order;
}

std::vector<int> louvain_once(const WeightedGraph& g, const LouvainOptions& opts, std::mt19937_64* rng) {
  const std::size_t n = g.size();
  std::vector<int> membership(n);
  for (std::size_t i = 0; i < n; ++i) membership[i] = static_cast<int>(i);

  WeightedGraph level = g;
  for (std::size_t depth = 0; depth < opts.max_levels; ++depth) {
    std::vector<int> labels(level.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i);
    auto order = visit_order(level.size(), rng);
    if (!local_moving(level, labels, opts.resolution, order)) break;
    labels = renumber(labels);
    for (auto& c : membership) c = labels[static_cast<std::size_t>(c)];
    std::size_t k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    if (k == level.size()) break;
    level = aggregate(level, labels, k);
  }
  if (opts.refine) {
    membership = renumber(membership);
    auto order = visit_order(n, nullptr);
    for (bool changed = true; changed;) {
      changed = local_moving(g, membership, opts.resolution, order);
      changed = merge_communities(g, membership, opts.resolution) || changed;
      if (n <= opts.resplit_max_nodes)
        changed = resplit_communities(g, membership, opts.resolution) || changed;
    }
  }
  return renumber(membership);
}

}  // namespace

void WeightedGraph::add_edge(std::size_t u, std::size_t v, double w) {
  if (u == v) {
    self_[u] += w;
    return;
  }
  auto insert = [&](std::size_t a, std::size_t b) {
    auto& row = adj_[a];
    auto it = std::lower_bound(row.begin(), row.end(), b,
                               [](const auto& e, std::size_t key) { return e.first < key; });
    if (it != row.end() && it->first == b)
      it->second += w;
    else
      row.insert(it, {b, w});
  };
  insert(u, v);
  insert(v, u);
}

double WeightedGraph::degree(std::size_t u) const {
  double d = 2.0 * self_[u];
  for (const auto& [_, w] : adj_[u]) d += w;
  return d;
}

double WeightedGraph::total_weight() const {
  double m = 0.0;
  for (std::size_t u = 0; u < size(); ++u) {
    m += self_[u];
    for (const auto& [v, w] : adj_[u])
      if (v > u) m += w;
  }
  return m;
}

double modularity(const WeightedGraph& g, std::span<const int> labels, double resolution) {
  const double m = g.total_weight();
  if (m <= 0.0) return 0.0;
  std::map<int, double> internal;  // sum of edge weights inside each community
  std::map<int, double> tot;
  for (std::size_t u = 0; u < g.size(); ++u) {
    tot[labels[u]] += g.degree(u);
    internal[labels[u]] += g.self_loop(u);
    for (const auto& [v, w] : g.neighbors(u))
      if (v > u && labels[v] == labels[u]) internal[labels[u]] += w;
  }
  double q = 0.0;
  for (const auto& [c, t] : tot) q += internal[c] / m - resolution * (t / (2.0 * m)) * (t / (2.0 * m));
  return q;
}

std::vector<int> louvain(const WeightedGraph& g, const LouvainOptions& opts) {
  const std::size_t n = g.size();
  if (n == 0 || g.total_weight() <= 0.0) {
    std::vector<int> singletons(n);
    for (std::size_t i = 0; i < n; ++i) singletons[i] = static_cast<int>(i);
    return singletons;
  }
  // Run 0 visits nodes in index order; later runs use seeded orders. The
  // best modularity wins, earlier runs on ties.
  std::mt19937_64 rng(opts.seed);
  auto best = louvain_once(g, opts, nullptr);
  double best_q = modularity(g, best, opts.resolution);
  for (std::size_t r = 1; r < opts.restarts; ++r) {
    auto labels = louvain_once(g, opts, &rng);
    double q = modularity(g, labels, opts.resolution);
    if (q > best_q + kMinGain) {
      best_q = q;
      best = std::move(labels);
    }
  }
  return best;
}

}  // namespace discordq
