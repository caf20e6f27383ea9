// Independent brute-force oracles. Each reimplements a definition from
// scratch so library results can be checked against a second route; nothing
// here may call the implementation it verifies.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "hinimp/graph.hpp"
#include "hinimp/metapath.hpp"

namespace oracles {

// Exhaustive 1-Wasserstein between equal-size empirical distributions:
// minimum over all assignments of the mean absolute gap. Feasible for n <= 8.
inline double exhaustive_w1(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0;
    for (size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

// Depth-bounded DFS enumeration of metapath instances: count of concrete
// paths u -> v whose node/edge types match slot for slot.
inline std::map<std::pair<hinimp::NodeId, hinimp::NodeId>, int64_t> dfs_instance_counts(
    const hinimp::HeterogeneousGraph& g, const hinimp::Metapath& p) {
  std::map<std::pair<hinimp::NodeId, hinimp::NodeId>, int64_t> counts;
  std::function<void(hinimp::NodeId, hinimp::NodeId, size_t)> walk =
      [&](hinimp::NodeId start, hinimp::NodeId cur, size_t hop) {
        if (hop == p.edge_types.size()) {
          counts[{start, cur}]++;
          return;
        }
        for (const auto& e : g.edges()) {
          if (e.src != cur || e.etype != p.edge_types[hop]) continue;
          if (g.node_type(e.dst) != p.node_types[hop + 1]) continue;
          walk(start, e.dst, hop + 1);
        }
      };
  for (hinimp::NodeId v = 0; v < g.node_count(); ++v)
    if (g.node_type(v) == p.source_type()) walk(v, v, 0);
  return counts;
}

// --- centrality oracles on an undirected simple graph -------------------------

using Adjacency = std::vector<std::vector<int64_t>>;

inline std::vector<double> degree_oracle(const Adjacency& adj) {
  std::vector<double> out;
  for (const auto& row : adj) out.push_back(static_cast<double>(row.size()));
  return out;
}

// dense transition-matrix PageRank, damping 0.85, dangling mass spread uniformly
inline std::vector<double> pagerank_oracle(const Adjacency& adj, int iters = 500) {
  const size_t n = adj.size();
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  for (size_t v = 0; v < n; ++v) {
    if (adj[v].empty()) {
      for (size_t u = 0; u < n; ++u) t[v][u] = 1.0 / static_cast<double>(n);
    } else {
      for (const int64_t u : adj[v]) t[v][static_cast<size_t>(u)] = 1.0 / static_cast<double>(adj[v].size());
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), nx(n);
  for (int it = 0; it < iters; ++it) {
    for (size_t u = 0; u < n; ++u) {
      double acc = 0;
      for (size_t v = 0; v < n; ++v) acc += x[v] * t[v][u];
      nx[u] = 0.15 / static_cast<double>(n) + 0.85 * acc;
    }
    x.swap(nx);
  }
  return x;
}

// dense shifted iteration x <- (A + I) x with L2 normalization; the dense
// matrix-vector route is independent of the adjacency-list implementation
inline std::vector<double> eigenvector_oracle(const Adjacency& adj, int iters = 3000) {
  const size_t n = adj.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (size_t v = 0; v < n; ++v) {
    m[v][v] = 1.0;
    for (const int64_t u : adj[v]) m[v][static_cast<size_t>(u)] = 1.0;
  }
  std::vector<double> x(n, 1.0), nx(n);
  {
    double norm = std::sqrt(static_cast<double>(n));
    for (auto& v : x) v /= norm;
  }
  for (int it = 0; it < iters; ++it) {
    for (size_t v = 0; v < n; ++v) {
      double acc = 0;
      for (size_t u = 0; u < n; ++u) acc += m[v][u] * x[u];
      nx[v] = acc;
    }
    double norm = 0;
    for (const double t : nx) norm += t * t;
    norm = std::sqrt(norm);
    if (norm == 0) return x;
    double diff = 0;
    for (size_t v = 0; v < n; ++v) {
      nx[v] /= norm;
      diff += std::abs(nx[v] - x[v]);
    }
    x = nx;
    if (diff < 1e-14) break;
  }
  return x;
}

// core numbers via definition: the k-core is the maximal subgraph with all
// degrees >= k; a node's core number is the largest k whose k-core contains it.
inline std::vector<double> kcore_oracle(const Adjacency& adj) {
  const size_t n = adj.size();
  std::vector<double> core(n, 0);
  for (int64_t k = 1; k <= static_cast<int64_t>(n); ++k) {
    std::vector<char> alive(n, 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        int64_t deg = 0;
        for (const int64_t u : adj[v])
          if (alive[static_cast<size_t>(u)]) ++deg;
        if (deg < k) {
          alive[v] = 0;
          changed = true;
        }
      }
    }
    for (size_t v = 0; v < n; ++v)
      if (alive[v]) core[v] = static_cast<double>(k);
  }
  return core;
}

// all-pairs distances via Floyd-Warshall (vs the BFS in the implementation)
inline std::vector<std::vector<double>> floyd_warshall(const Adjacency& adj) {
  const size_t n = adj.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (size_t v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (const int64_t u : adj[v]) d[v][static_cast<size_t>(u)] = 1;
  }
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline std::vector<double> closeness_oracle(const Adjacency& adj) {
  const auto d = floyd_warshall(adj);
  const size_t n = adj.size();
  std::vector<double> out(n, 0);
  for (size_t v = 0; v < n; ++v) {
    double total = 0;
    double reach = 0;
    for (size_t u = 0; u < n; ++u) {
      if (u == v || std::isinf(d[v][u])) continue;
      total += d[v][u];
      reach += 1;
    }
    out[v] = (reach > 0 && n > 1 && total > 0) ? (reach / static_cast<double>(n - 1)) * (reach / total) : 0.0;
  }
  return out;
}

inline std::vector<double> harmonic_oracle(const Adjacency& adj) {
  const auto d = floyd_warshall(adj);
  const size_t n = adj.size();
  std::vector<double> out(n, 0);
  for (size_t v = 0; v < n; ++v)
    for (size_t u = 0; u < n; ++u)
      if (u != v && !std::isinf(d[v][u])) out[v] += 1.0 / d[v][u];
  return out;
}

inline std::vector<double> minmax(const std::vector<double>& v) {
  double lo = v[0], hi = v[0];
  for (const double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<double> out(v.size(), 0.0);
  if (hi > lo)
    for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
  return out;
}

// central finite difference d loss / d x through an arbitrary re-evaluation
inline double central_difference(const std::function<double(double)>& eval_at, double x0, double h = 1e-6) {
  return (eval_at(x0 + h) - eval_at(x0 - h)) / (2.0 * h);
}

inline double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-10});
  return std::abs(a - b) / scale;
}

// Central differences with h=1e-6 carry ~1e-10 absolute noise on O(1) losses,
// so gradients near zero need an absolute floor next to the relative band.
inline bool grad_close(double fd, double tape, double rel_tol = 1e-4, double abs_tol = 1e-7) {
  return std::abs(fd - tape) <= rel_tol * std::max(std::abs(fd), std::abs(tape)) + abs_tol;
}

}  // namespace oracles
