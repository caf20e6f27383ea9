#include "hinimp/node2vec.hpp"

#include <algorithm>
#include <cmath>

#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace hinimp {

void WalkGraph::add_arc(int64_t u, int64_t v, double w) {
  if (w <= 0) return;
  adj[static_cast<size_t>(u)].push_back({v, w});
}

void WalkGraph::sort_arcs() {
  for (auto& row : adj)
    std::sort(row.begin(), row.end(), [](const Arc& a, const Arc& b) { return a.to < b.to; });
}

bool WalkGraph::has_arc(int64_t u, int64_t v) const {
  const auto& row = adj[static_cast<size_t>(u)];
  const auto it = std::lower_bound(row.begin(), row.end(), v,
                                   [](const Arc& a, int64_t id) { return a.to < id; });
  return it != row.end() && it->to == v;
}

std::vector<double> transition_probs(const WalkGraph& g, int64_t prev, int64_t cur, double p, double q) {
  if (p <= 0 || q <= 0) throw DataError("node2vec: p and q must be positive");
  const auto& row = g.adj[static_cast<size_t>(cur)];
  std::vector<double> w(row.size());
  double total = 0;
  for (size_t i = 0; i < row.size(); ++i) {
    double bias = 1.0;
    if (prev >= 0) {
      if (row[i].to == prev)
        bias = 1.0 / p;
      else if (!g.has_arc(prev, row[i].to))
        bias = 1.0 / q;
    }
    w[i] = row[i].weight * bias;
    total += w[i];
  }
  if (total <= 0) return {};
  for (auto& x : w) x /= total;
  return w;
}

namespace {

int64_t sample_index(const std::vector<double>& probs, Rng& rng) {
  const double r = rng.uniform();
  double acc = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (r < acc) return static_cast<int64_t>(i);
  }
  return static_cast<int64_t>(probs.size()) - 1;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<std::vector<double>> random_walk_embed(const WalkGraph& g, const Node2VecParams& params) {
  const int64_t n = g.size();
  if (n == 0) throw DataError("random_walk_embed: empty graph");
  const int dim = params.dim;

  // walk corpus, one stream per (start node, walk) so ordering never depends
  // on scheduling
  std::vector<std::vector<int64_t>> walks;
  for (int64_t s = 0; s < n; ++s) {
    for (int wk = 0; wk < params.walks_per_node; ++wk) {
      Rng rng(mix_seed(params.seed, "walk", static_cast<uint64_t>(s), static_cast<uint64_t>(wk)));
      std::vector<int64_t> walk{s};
      int64_t prev = -1, cur = s;
      for (int step = 1; step < params.walk_length; ++step) {
        const auto probs = transition_probs(g, prev, cur, params.p, params.q);
        if (probs.empty()) break;
        const int64_t pick = g.adj[static_cast<size_t>(cur)][static_cast<size_t>(sample_index(probs, rng))].to;
        walk.push_back(pick);
        prev = cur;
        cur = pick;
      }
      if (walk.size() >= 2) walks.push_back(std::move(walk));
    }
  }

  std::vector<char> in_corpus(static_cast<size_t>(n), 0);
  std::vector<int64_t> freq(static_cast<size_t>(n), 0);
  int64_t tokens = 0;
  for (const auto& w : walks)
    for (const int64_t v : w) {
      in_corpus[static_cast<size_t>(v)] = 1;
      freq[static_cast<size_t>(v)]++;
      ++tokens;
    }

  std::vector<std::vector<double>> in_emb(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(dim), 0.0));
  if (walks.empty()) return in_emb;

  // unigram^0.75 table as a cumulative distribution
  std::vector<double> cum(static_cast<size_t>(n), 0.0);
  double total = 0;
  for (int64_t v = 0; v < n; ++v) {
    total += freq[static_cast<size_t>(v)] > 0 ? std::pow(static_cast<double>(freq[static_cast<size_t>(v)]), 0.75) : 0.0;
    cum[static_cast<size_t>(v)] = total;
  }
  const auto sample_negative = [&](Rng& rng) {
    const double r = rng.uniform() * total;
    return static_cast<int64_t>(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
  };

  Rng init_rng(mix_seed(params.seed, "sgns-init"));
  for (int64_t v = 0; v < n; ++v)
    if (in_corpus[static_cast<size_t>(v)])
      for (int d = 0; d < dim; ++d)
        in_emb[static_cast<size_t>(v)][static_cast<size_t>(d)] = init_rng.uniform(-0.5, 0.5) / dim;
  std::vector<std::vector<double>> out_emb(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(dim), 0.0));

  Rng train_rng(mix_seed(params.seed, "sgns-train"));
  std::vector<size_t> order(walks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> accum(static_cast<size_t>(dim));

  const int64_t total_tokens = static_cast<int64_t>(params.epochs) * tokens;
  int64_t seen = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    train_rng.shuffle(order);
    for (const size_t wi : order) {
      const auto& walk = walks[wi];
      for (size_t pos = 0; pos < walk.size(); ++pos) {
        ++seen;
        const double lr = params.lr0 *
                          std::max(1e-4, 1.0 - static_cast<double>(seen) / static_cast<double>(total_tokens + 1));
        const int64_t center = walk[pos];
        const int window = 1 + static_cast<int>(train_rng.below(static_cast<uint64_t>(params.window)));
        auto& vin = in_emb[static_cast<size_t>(center)];
        for (int off = -window; off <= window; ++off) {
          if (off == 0) continue;
          const int64_t cpos = static_cast<int64_t>(pos) + off;
          if (cpos < 0 || cpos >= static_cast<int64_t>(walk.size())) continue;
          const int64_t context = walk[static_cast<size_t>(cpos)];
          std::fill(accum.begin(), accum.end(), 0.0);
          for (int k = 0; k <= params.negatives; ++k) {
            int64_t target;
            double label;
            if (k == 0) {
              target = context;
              label = 1.0;
            } else {
              target = sample_negative(train_rng);
              if (target == context) continue;
              label = 0.0;
            }
            auto& vout = out_emb[static_cast<size_t>(target)];
            double f = 0;
            for (int d = 0; d < dim; ++d) f += vin[static_cast<size_t>(d)] * vout[static_cast<size_t>(d)];
            const double gscale = (label - sigmoid(f)) * lr;
            for (int d = 0; d < dim; ++d) {
              accum[static_cast<size_t>(d)] += gscale * vout[static_cast<size_t>(d)];
              vout[static_cast<size_t>(d)] += gscale * vin[static_cast<size_t>(d)];
            }
          }
          for (int d = 0; d < dim; ++d) vin[static_cast<size_t>(d)] += accum[static_cast<size_t>(d)];
        }
      }
    }
  }
  return in_emb;
}

}  // namespace hinimp
