#include "hinimp/ot_head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace hinimp {

ReferenceDistribution ReferenceDistribution::create(int64_t dim, uint64_t seed) {
  if (dim <= 0) throw DataError("reference distribution: dimension must be positive");
  Rng rng(mix_seed(seed, "reference"));
  std::vector<double> v(static_cast<size_t>(dim));
  while (true) {
    for (auto& x : v) x = rng.uniform();
    std::set<double> uniq(v.begin(), v.end());
    if (static_cast<int64_t>(uniq.size()) == dim) break;  // ties re-sampled so ranks are unique
  }
  return from_values(std::move(v), seed);
}

ReferenceDistribution ReferenceDistribution::from_values(std::vector<double> values, uint64_t seed) {
  ReferenceDistribution ref;
  ref.h0 = std::move(values);
  ref.seed = seed;
  const int64_t d = ref.dim();
  ref.sort_perm.resize(static_cast<size_t>(d));
  std::iota(ref.sort_perm.begin(), ref.sort_perm.end(), int64_t{0});
  std::stable_sort(ref.sort_perm.begin(), ref.sort_perm.end(),
                   [&](int64_t a, int64_t b) { return ref.h0[static_cast<size_t>(a)] < ref.h0[static_cast<size_t>(b)]; });
  ref.rank.assign(static_cast<size_t>(d), 0);
  for (int64_t pos = 0; pos < d; ++pos) ref.rank[static_cast<size_t>(ref.sort_perm[static_cast<size_t>(pos)])] = pos;
  return ref;
}

double empirical_cdf(const std::vector<double>& h, double x) {
  if (h.empty()) return 0.0;
  int64_t c = 0;
  for (const double v : h)
    if (v <= x) ++c;
  return static_cast<double>(c) / static_cast<double>(h.size());
}

std::vector<double> wasserstein_embed(const std::vector<double>& h, const ReferenceDistribution& ref) {
  if (static_cast<int64_t>(h.size()) != ref.dim())
    throw DataError("wasserstein_embed: dimension mismatch: " + std::to_string(h.size()) + " vs reference " +
                    std::to_string(ref.dim()));
  std::vector<double> sorted = h;
  std::stable_sort(sorted.begin(), sorted.end());
  std::vector<double> out(h.size());
  for (size_t n = 0; n < h.size(); ++n)
    out[n] = sorted[static_cast<size_t>(ref.rank[n])] - ref.h0[n];
  return out;
}

Tensor wasserstein_embed_rows(const Tensor& h_rows, const ReferenceDistribution& ref) {
  if (h_rows.cols() != ref.dim())
    throw DataError("wasserstein_embed_rows: dimension mismatch: " + h_rows.shape_str() + " vs reference " +
                    std::to_string(ref.dim()));
  const Tensor sorted = sort_rows(h_rows);
  const Tensor aligned = permute_cols(sorted, ref.rank);
  const Tensor h0 = Tensor::from({ref.dim()}, ref.h0);
  return sub(aligned, repeat_row(h0, h_rows.rows()));
}

double pairwise_distance(const std::vector<double>& hstar_i, const std::vector<double>& hstar_j) {
  if (hstar_i.size() != hstar_j.size()) throw DataError("pairwise_distance: length mismatch");
  double acc = 0;
  for (size_t n = 0; n < hstar_i.size(); ++n) acc += std::abs(hstar_i[n] - hstar_j[n]);
  return acc;
}

double wasserstein_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("wasserstein_oracle: length mismatch");
  if (a.empty()) return 0.0;
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double acc = 0;
  for (size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
  return acc / static_cast<double>(sa.size());
}

double score(const std::vector<double>& hstar, const std::vector<double>& lambda) {
  if (hstar.size() != lambda.size()) throw DataError("score: length mismatch");
  double acc = 0;
  for (size_t i = 0; i < hstar.size(); ++i) acc += hstar[i] * lambda[i];
  return acc;
}

}  // namespace hinimp
