#pragma once

#include <array>
#include <string>
#include <vector>

#include "hinimp/metapath.hpp"

namespace hinimp {

// The L=6 structural measures, in bank-slot order.
inline constexpr int kCentralityCount = 6;
inline constexpr std::array<const char*, kCentralityCount> kCentralityNames = {
    "degree", "pagerank", "eigenvector", "kcore", "closeness", "harmonic"};

struct CentralityResult {
  // raw[i][l] and normalized[i][l] for member i, measure l.
  // normalized = per-measure min-max over members (zero range -> 0).
  std::vector<std::array<double, kCentralityCount>> raw;
  std::vector<std::array<double, kCentralityCount>> normalized;
};

// All measures on the unweighted simple undirected graph of the sub-network.
//   degree      distinct-neighbor count
//   pagerank    damping 0.85, power iteration, residual < 1e-10 or 200 iters,
//               dangling mass redistributed uniformly; sums to 1
//   eigenvector power iteration with L2 normalization (uniform start)
//   kcore       core number by peeling
//   closeness   Wasserman-Faust scaled: ((r-1)/(n-1)) * ((r-1)/sum d) over the
//               reachable set r; 0 for singletons
//   harmonic    sum of 1/d over reachable peers (unreachable contribute 0)
CentralityResult compute_centralities(const InducedSubnetwork& s);

// Same measures for any adjacency list (shared by tests and the ablation CLI).
CentralityResult compute_centralities(const std::vector<std::vector<int64_t>>& adj);

}  // namespace hinimp
