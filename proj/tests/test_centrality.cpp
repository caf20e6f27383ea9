#include <doctest.h>

#include <numeric>

#include "hinimp/centrality.hpp"
#include "hinimp/rng.hpp"
#include "oracles.hpp"

using namespace hinimp;
using oracles::Adjacency;

namespace {

Adjacency random_graph(uint64_t seed, int64_t n_max = 50) {
  Rng rng(seed);
  const int64_t n = 2 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(n_max - 1)));
  Adjacency adj(static_cast<size_t>(n));
  const int64_t m = static_cast<int64_t>(rng.below(static_cast<uint64_t>(2 * n))) + 1;
  for (int64_t i = 0; i < m; ++i) {
    const int64_t u = static_cast<int64_t>(rng.below(static_cast<uint64_t>(n)));
    const int64_t v = static_cast<int64_t>(rng.below(static_cast<uint64_t>(n)));
    if (u == v) continue;
    if (std::find(adj[static_cast<size_t>(u)].begin(), adj[static_cast<size_t>(u)].end(), v) !=
        adj[static_cast<size_t>(u)].end())
      continue;
    adj[static_cast<size_t>(u)].push_back(v);
    adj[static_cast<size_t>(v)].push_back(u);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

// ranks over values quantized at the comparison tolerance, so that agreement
// is exact wherever the two routes agree to 1e-8
std::vector<size_t> rank_order(const std::vector<double>& v) {
  std::vector<int64_t> q(v.size());
  for (size_t i = 0; i < v.size(); ++i) q[i] = std::llround(v[i] * 1e8);
  std::vector<size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return q[a] != q[b] ? q[a] < q[b] : a < b;
  });
  return idx;
}

}  // namespace

TEST_CASE("hand fixtures") {
  SUBCASE("2-node symmetric edge: PageRank is (0.5, 0.5)") {
    const Adjacency adj{{1}, {0}};
    const auto r = compute_centralities(adj);
    CHECK(r.raw[0][1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.raw[1][1] == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("path a-b-c: degrees 1,2,1 and k-core all 1") {
    const Adjacency adj{{1}, {0, 2}, {1}};
    const auto r = compute_centralities(adj);
    CHECK(r.raw[0][0] == 1);
    CHECK(r.raw[1][0] == 2);
    CHECK(r.raw[2][0] == 1);
    CHECK(r.raw[0][3] == 1);
    CHECK(r.raw[1][3] == 1);
    CHECK(r.raw[2][3] == 1);
  }
  SUBCASE("triangle: eigenvector centrality equal across nodes") {
    const Adjacency adj{{1, 2}, {0, 2}, {0, 1}};
    const auto r = compute_centralities(adj);
    CHECK(r.raw[0][2] == doctest::Approx(r.raw[1][2]).epsilon(1e-9));
    CHECK(r.raw[1][2] == doctest::Approx(r.raw[2][2]).epsilon(1e-9));
  }
  SUBCASE("single node: degree 0, PageRank 1, k-core 0, closeness/harmonic 0, eigenvector 1") {
    const auto r = compute_centralities(Adjacency{{}});
    CHECK(r.raw[0][0] == 0);
    CHECK(r.raw[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.raw[0][2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.raw[0][3] == 0);
    CHECK(r.raw[0][4] == 0);
    CHECK(r.raw[0][5] == 0);
  }
}

TEST_CASE("PageRank sums to 1 and matches the dense oracle") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto adj = random_graph(seed);
    const auto r = compute_centralities(adj);
    double total = 0;
    for (const auto& row : r.raw) total += row[1];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    const auto oracle = oracles::pagerank_oracle(adj);
    for (size_t v = 0; v < adj.size(); ++v)
      CHECK(r.raw[v][1] == doctest::Approx(oracle[v]).epsilon(1e-7));
  }
}

TEST_CASE("all six measures match independent brute-force definitions (<= 50 nodes)") {
  for (uint64_t seed = 1; seed <= 15; ++seed) {
    const auto adj = random_graph(seed);
    const auto r = compute_centralities(adj);
    const std::array<std::vector<double>, kCentralityCount> oracle = {
        oracles::degree_oracle(adj),      oracles::pagerank_oracle(adj), oracles::eigenvector_oracle(adj),
        oracles::kcore_oracle(adj),       oracles::closeness_oracle(adj), oracles::harmonic_oracle(adj)};
    for (int l = 0; l < kCentralityCount; ++l) {
      const auto normalized = oracles::minmax(oracle[static_cast<size_t>(l)]);
      std::vector<double> mine;
      for (const auto& row : r.normalized) mine.push_back(row[static_cast<size_t>(l)]);
      // values within 1e-8 after normalization
      for (size_t v = 0; v < adj.size(); ++v)
        CHECK_MESSAGE(std::abs(mine[v] - normalized[v]) < 1e-8, "measure ", kCentralityNames[static_cast<size_t>(l)],
                      " node ", v, " seed ", seed);
      // exact rank agreement
      CHECK(rank_order(mine) == rank_order(normalized));
    }
  }
}

TEST_CASE("normalized values live in [0,1]; zero-range columns normalize to 0") {
  const Adjacency adj{{1}, {0}};
  const auto r = compute_centralities(adj);
  for (const auto& row : r.normalized)
    for (const double x : row) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  // both nodes identical -> every column has zero range
  for (const auto& row : r.normalized)
    for (const double x : row) CHECK(x == 0.0);
}
