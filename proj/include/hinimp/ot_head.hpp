#pragma once

#include <cstdint>
#include <vector>

#include "hinimp/tensor.hpp"

namespace hinimp {

// Fixed random reference acting as the uninformative origin of the embedding
// space. Never trained; frozen after creation and serialized with checkpoints.
struct ReferenceDistribution {
  std::vector<double> h0;         // entries uniform in [0,1), pairwise distinct
  std::vector<int64_t> sort_perm; // ascending argsort of h0
  std::vector<int64_t> rank;      // rank[n] = position of h0[n] in the ascending order
  uint64_t seed = 0;

  int64_t dim() const { return static_cast<int64_t>(h0.size()); }

  static ReferenceDistribution create(int64_t dim, uint64_t seed);
  // Rebuild sort_perm/rank from given values (checkpoint load).
  static ReferenceDistribution from_values(std::vector<double> values, uint64_t seed);
};

// Fraction of entries of h that are <= x (right-continuous step function).
double empirical_cdf(const std::vector<double>& h, double x);

// h*[n] = (rank(h0[n])-th smallest entry of h) - h0[n].
// ||h*||_1 equals dim * W1(P0, P_h) exactly for equal-atom empirical
// distributions. Plain-vector form for tests and analysis.
std::vector<double> wasserstein_embed(const std::vector<double>& h, const ReferenceDistribution& ref);

// Tape form over row-stacked inputs [B, dim]; the per-row sort permutation is
// a constant of the forward pass, gradients flow to the gathered entries.
Tensor wasserstein_embed_rows(const Tensor& h_rows, const ReferenceDistribution& ref);

// ||h*_i - h*_j||_1; equals dim * W1(P_i, P_j) when both use the same reference.
double pairwise_distance(const std::vector<double>& hstar_i, const std::vector<double>& hstar_j);

// Exact 1-D W1 between equal-size uniform empirical distributions: mean
// absolute gap of the ascending sorts. Independent of the embedding path;
// used as the oracle in the acceptance suite.
double wasserstein_oracle(const std::vector<double>& a, const std::vector<double>& b);

// g(v) = lambda . h*
double score(const std::vector<double>& hstar, const std::vector<double>& lambda);

}  // namespace hinimp
