#pragma once

#include <cstdint>
#include <vector>

namespace hinimp {

// Local weighted digraph over 0..n-1; adjacency sorted by neighbor id.
struct WalkGraph {
  struct Arc {
    int64_t to;
    double weight;  // > 0
  };
  std::vector<std::vector<Arc>> adj;

  int64_t size() const { return static_cast<int64_t>(adj.size()); }
  void add_arc(int64_t u, int64_t v, double w);
  void sort_arcs();
  bool has_arc(int64_t u, int64_t v) const;  // binary search
};

struct Node2VecParams {
  int walks_per_node = 10;
  int walk_length = 40;
  int window = 5;
  double p = 1.0;  // return bias
  double q = 1.0;  // in-out bias
  int negatives = 5;
  int epochs = 5;
  int dim = 128;
  double lr0 = 0.025;
  uint64_t seed = 0;
};

// Normalized second-order transition distribution out of `cur` given the
// previous node (`prev` < 0 for the first step). Sums to 1; empty when cur
// has no positive-weight arcs.
std::vector<double> transition_probs(const WalkGraph& g, int64_t prev, int64_t cur, double p, double q);

// Biased walks + skip-gram with negative sampling. Row i is the in-embedding
// of node i; nodes that never enter the walk corpus get zero rows.
// Deterministic for a fixed seed.
std::vector<std::vector<double>> random_walk_embed(const WalkGraph& g, const Node2VecParams& params);

}  // namespace hinimp
