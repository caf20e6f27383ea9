#include "hinimp/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "hinimp/errors.hpp"

namespace hinimp {

namespace {

std::vector<double> pagerank(const std::vector<std::vector<int64_t>>& adj) {
  const size_t n = adj.size();
  const double damping = 0.85;
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), nx(n);
  for (int iter = 0; iter < 200; ++iter) {
    double dangling = 0.0;
    for (size_t v = 0; v < n; ++v)
      if (adj[v].empty()) dangling += x[v];
    std::fill(nx.begin(), nx.end(), (1.0 - damping) / static_cast<double>(n) +
                                        damping * dangling / static_cast<double>(n));
    for (size_t v = 0; v < n; ++v) {
      if (adj[v].empty()) continue;
      const double share = damping * x[v] / static_cast<double>(adj[v].size());
      for (const int64_t u : adj[v]) nx[static_cast<size_t>(u)] += share;
    }
    double residual = 0.0;
    for (size_t v = 0; v < n; ++v) residual += std::abs(nx[v] - x[v]);
    x.swap(nx);
    if (residual < 1e-10) break;
  }
  return x;
}

std::vector<double> eigenvector_centrality(const std::vector<std::vector<int64_t>>& adj) {
  const size_t n = adj.size();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), nx(n);
  // power iteration on A + I: same eigenvectors, and the shift keeps
  // bipartite components from oscillating
  for (int iter = 0; iter < 1000; ++iter) {
    for (size_t v = 0; v < n; ++v) {
      nx[v] = x[v];
      for (const int64_t u : adj[v]) nx[v] += x[static_cast<size_t>(u)];
    }
    double norm = 0.0;
    for (const double t : nx) norm += t * t;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    double diff = 0.0;
    for (size_t v = 0; v < n; ++v) {
      nx[v] /= norm;
      diff += std::abs(nx[v] - x[v]);
    }
    x.swap(nx);
    if (diff < 1e-13) break;
  }
  return x;
}

std::vector<int64_t> core_numbers(const std::vector<std::vector<int64_t>>& adj) {
  const size_t n = adj.size();
  std::vector<int64_t> deg(n), core(n, 0);
  for (size_t v = 0; v < n; ++v) deg[v] = static_cast<int64_t>(adj[v].size());
  std::vector<char> removed(n, 0);
  int64_t k = 0;
  size_t left = n;
  while (left > 0) {
    bool peeled = true;
    while (peeled) {
      peeled = false;
      for (size_t v = 0; v < n; ++v) {
        if (removed[v] || deg[v] > k) continue;
        removed[v] = 1;
        core[v] = k;
        --left;
        peeled = true;
        for (const int64_t u : adj[v])
          if (!removed[static_cast<size_t>(u)]) deg[static_cast<size_t>(u)]--;
      }
    }
    ++k;
  }
  return core;
}

void bfs_distances(const std::vector<std::vector<int64_t>>& adj, size_t start, std::vector<int64_t>& dist) {
  std::fill(dist.begin(), dist.end(), -1);
  dist[start] = 0;
  std::deque<size_t> q{start};
  while (!q.empty()) {
    const size_t v = q.front();
    q.pop_front();
    for (const int64_t u : adj[v])
      if (dist[static_cast<size_t>(u)] < 0) {
        dist[static_cast<size_t>(u)] = dist[v] + 1;
        q.push_back(static_cast<size_t>(u));
      }
  }
}

}  // namespace

CentralityResult compute_centralities(const std::vector<std::vector<int64_t>>& adj) {
  const size_t n = adj.size();
  if (n == 0) throw DataError("compute_centralities: empty sub-network");

  CentralityResult res;
  res.raw.assign(n, {});

  const auto pr = pagerank(adj);
  const auto ev = eigenvector_centrality(adj);
  const auto core = core_numbers(adj);

  std::vector<int64_t> dist(n);
  for (size_t v = 0; v < n; ++v) {
    res.raw[v][0] = static_cast<double>(adj[v].size());
    res.raw[v][1] = pr[v];
    res.raw[v][2] = ev[v];
    res.raw[v][3] = static_cast<double>(core[v]);
    bfs_distances(adj, v, dist);
    int64_t reach = 0, total = 0;
    double harmonic = 0.0;
    for (size_t u = 0; u < n; ++u) {
      if (u == v || dist[u] < 0) continue;
      ++reach;
      total += dist[u];
      harmonic += 1.0 / static_cast<double>(dist[u]);
    }
    res.raw[v][4] = (reach > 0 && n > 1 && total > 0)
                        ? (static_cast<double>(reach) / static_cast<double>(n - 1)) *
                              (static_cast<double>(reach) / static_cast<double>(total))
                        : 0.0;
    res.raw[v][5] = harmonic;
  }

  res.normalized = res.raw;
  for (int l = 0; l < kCentralityCount; ++l) {
    double lo = res.raw[0][static_cast<size_t>(l)], hi = lo;
    for (size_t v = 1; v < n; ++v) {
      lo = std::min(lo, res.raw[v][static_cast<size_t>(l)]);
      hi = std::max(hi, res.raw[v][static_cast<size_t>(l)]);
    }
    const double range = hi - lo;
    for (size_t v = 0; v < n; ++v)
      res.normalized[v][static_cast<size_t>(l)] = range > 0 ? (res.raw[v][static_cast<size_t>(l)] - lo) / range : 0.0;
  }
  return res;
}

CentralityResult compute_centralities(const InducedSubnetwork& s) {
  if (s.members.empty()) throw DataError("compute_centralities: empty sub-network");
  return compute_centralities(s.simple_adjacency());
}

}  // namespace hinimp
