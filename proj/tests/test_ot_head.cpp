#include <doctest.h>

#include <cmath>

#include "hinimp/errors.hpp"
#include "hinimp/ot_head.hpp"
#include "hinimp/rng.hpp"
#include "oracles.hpp"

using namespace hinimp;

namespace {

std::vector<double> random_vec(int64_t n, Rng& rng, double lo = -5, double hi = 5) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

double l1_norm(const std::vector<double>& v) {
  double acc = 0;
  for (const double x : v) acc += std::abs(x);
  return acc;
}

}  // namespace

TEST_CASE("empirical_cdf is the right-continuous step function") {
  const std::vector<double> h{1, 2, 3};
  CHECK(empirical_cdf(h, 2.5) == doctest::Approx(2.0 / 3));
  CHECK(empirical_cdf(h, 0.5) == 0.0);
  CHECK(empirical_cdf(h, 3.0) == 1.0);
  CHECK(empirical_cdf(h, 2.0) == doctest::Approx(2.0 / 3));  // right continuity: <= x
}

TEST_CASE("reference distribution has unique sorted values and consistent ranks") {
  const auto ref = ReferenceDistribution::create(64, 42);
  REQUIRE(ref.dim() == 64);
  std::vector<double> sorted;
  for (const int64_t i : ref.sort_perm) sorted.push_back(ref.h0[static_cast<size_t>(i)]);
  for (size_t i = 1; i < sorted.size(); ++i) CHECK(sorted[i] > sorted[i - 1]);
  for (int64_t n = 0; n < ref.dim(); ++n)
    CHECK(ref.sort_perm[static_cast<size_t>(ref.rank[static_cast<size_t>(n)])] == n);
  // reconstruction from values matches
  const auto ref2 = ReferenceDistribution::from_values(ref.h0, ref.seed);
  CHECK(ref2.rank == ref.rank);
}

TEST_CASE("wasserstein_embed hand example") {
  const auto ref = ReferenceDistribution::from_values({0.3, 0.1, 0.2}, 0);
  const auto hstar = wasserstein_embed({5, 4, 6}, ref);
  CHECK(hstar[0] == doctest::Approx(5.7));
  CHECK(hstar[1] == doctest::Approx(3.9));
  CHECK(hstar[2] == doctest::Approx(4.8));
  CHECK(l1_norm(hstar) == doctest::Approx(14.4));
  CHECK(wasserstein_oracle({5, 4, 6}, {0.3, 0.1, 0.2}) == doctest::Approx(4.8));
}

TEST_CASE("embedding identities") {
  Rng rng(7);
  const auto ref = ReferenceDistribution::create(32, 3);
  SUBCASE("h = h0 embeds to zero") {
    const auto hstar = wasserstein_embed(ref.h0, ref);
    for (const double v : hstar) CHECK(v == doctest::Approx(0.0));
  }
  SUBCASE("input permutation invariance") {
    auto h = random_vec(32, rng);
    const auto a = wasserstein_embed(h, ref);
    Rng shuffle_rng(9);
    shuffle_rng.shuffle(h);
    const auto b = wasserstein_embed(h, ref);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(wasserstein_embed({1.0, 2.0}, ref), DataError);
  }
}

TEST_CASE("||h*||_1 equals dim * W1(h, h0), and pairwise distances inherit it") {
  Rng rng(13);
  for (const int64_t dim : {4L, 32L, 256L}) {
    const auto ref = ReferenceDistribution::create(dim, static_cast<uint64_t>(dim));
    for (int trial = 0; trial < 50; ++trial) {
      const auto h = random_vec(dim, rng);
      const auto hstar = wasserstein_embed(h, ref);
      CHECK(l1_norm(hstar) ==
            doctest::Approx(static_cast<double>(dim) * wasserstein_oracle(h, ref.h0)).epsilon(1e-12));

      const auto h2 = random_vec(dim, rng);
      const auto hstar2 = wasserstein_embed(h2, ref);
      CHECK(pairwise_distance(hstar, hstar2) ==
            doctest::Approx(static_cast<double>(dim) * wasserstein_oracle(h, h2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sorted coupling equals the exhaustive assignment minimum (lengths <= 6)") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t n = 2 + static_cast<int64_t>(rng.below(5));
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    CHECK(wasserstein_oracle(a, b) == doctest::Approx(oracles::exhaustive_w1(a, b)).epsilon(1e-12));
  }
  SUBCASE("fixed cases") {
    CHECK(wasserstein_oracle({0, 1}, {1, 2}) == doctest::Approx(1.0));
    CHECK(wasserstein_oracle({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
    CHECK(wasserstein_oracle({1, 2, 3}, {2, 3, 4}) == doctest::Approx(1.0));
  }
}

TEST_CASE("metric-space properties of the induced distance") {
  Rng rng(31);
  const int64_t dim = 16;
  const auto ref = ReferenceDistribution::create(dim, 77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_vec(dim, rng);
    const auto b = random_vec(dim, rng);
    const auto c = random_vec(dim, rng);
    const auto ea = wasserstein_embed(a, ref);
    const auto eb = wasserstein_embed(b, ref);
    const auto ec = wasserstein_embed(c, ref);
    const double dab = pairwise_distance(ea, eb);
    const double dba = pairwise_distance(eb, ea);
    const double dac = pairwise_distance(ea, ec);
    const double dbc = pairwise_distance(eb, ec);
    CHECK(dab == doctest::Approx(dba));          // symmetry
    CHECK(dab >= 0);
    CHECK(dac <= dab + dbc + 1e-9);              // triangle inequality
  }
  SUBCASE("identical multisets at distance zero") {
    auto a = random_vec(dim, rng);
    auto b = a;
    Rng r2(5);
    r2.shuffle(b);
    CHECK(pairwise_distance(wasserstein_embed(a, ref), wasserstein_embed(b, ref)) == doctest::Approx(0.0));
  }
  SUBCASE("distinct multisets at positive distance") {
    auto a = random_vec(dim, rng);
    auto b = a;
    b[3] += 0.5;
    CHECK(pairwise_distance(wasserstein_embed(a, ref), wasserstein_embed(b, ref)) > 0);
  }
}

TEST_CASE("score is the inner product") {
  CHECK(score({0, 0, 0}, {1, 2, 3}) == 0.0);
  CHECK(score({5, 7, 9}, {0, 1, 0}) == 7.0);  // one-hot selects an entry
  CHECK(score({1, 2}, {3, 4}) == doctest::Approx(11.0));
}

TEST_CASE("tape form of the embedding matches the plain form and differentiates") {
  Rng rng(41);
  const int64_t dim = 8;
  const auto ref = ReferenceDistribution::create(dim, 4);
  std::vector<double> h1 = random_vec(dim, rng), h2 = random_vec(dim, rng);
  std::vector<double> both = h1;
  both.insert(both.end(), h2.begin(), h2.end());
  Tensor rows = Tensor::from({2, dim}, both, true);
  const Tensor hstar = wasserstein_embed_rows(rows, ref);
  const auto e1 = wasserstein_embed(h1, ref);
  const auto e2 = wasserstein_embed(h2, ref);
  for (int64_t j = 0; j < dim; ++j) {
    CHECK(hstar.at(0, j) == doctest::Approx(e1[static_cast<size_t>(j)]));
    CHECK(hstar.at(1, j) == doctest::Approx(e2[static_cast<size_t>(j)]));
  }

  // d(lambda . h*)/dh matches finite differences at points with distinct entries
  std::vector<double> lambda = random_vec(dim, rng);
  Tensor lam = Tensor::from({dim, 1}, lambda);
  const auto eval = [&] {
    return sum(matmul(wasserstein_embed_rows(rows, ref), lam)).value();
  };
  backward(sum(matmul(hstar, lam)));
  for (size_t i = 0; i < rows.data().size(); ++i) {
    const double fd = oracles::central_difference(
        [&](double x) {
          const double saved = rows.data()[i];
          rows.data()[i] = x;
          const double v = eval();
          rows.data()[i] = saved;
          return v;
        },
        rows.data()[i]);
    CHECK(oracles::rel_error(fd, rows.grad()[i]) < 1e-4);
  }
}
