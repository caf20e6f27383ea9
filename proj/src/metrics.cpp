#include "hinimp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hinimp/errors.hpp"

namespace hinimp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

RegressionMetrics regression_metrics(const std::vector<double>& preds, const std::vector<double>& labels) {
  if (preds.size() != labels.size())
    throw DataError("regression_metrics: length mismatch: " + std::to_string(preds.size()) + " vs " +
                    std::to_string(labels.size()));
  if (preds.empty()) throw DataError("regression_metrics: empty input");
  RegressionMetrics m;
  double lo = labels[0], hi = labels[0];
  for (size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - labels[i];
    m.mae += std::abs(d);
    m.rmse += d * d;
    lo = std::min(lo, labels[i]);
    hi = std::max(hi, labels[i]);
  }
  m.mae /= static_cast<double>(preds.size());
  m.rmse = std::sqrt(m.rmse / static_cast<double>(preds.size()));
  m.nrmse = hi > lo ? m.rmse / (hi - lo) : kNaN;
  return m;
}

namespace {

// average ranks, ties get the mean of their positions (1-based)
std::vector<double> average_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[idx[t]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, va = 0, vb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0 || vb == 0) return kNaN;
  return num / std::sqrt(va * vb);
}

}  // namespace

double spearman(const std::vector<double>& preds, const std::vector<double>& labels) {
  if (preds.size() != labels.size()) throw DataError("spearman: length mismatch");
  if (preds.size() < 2) throw DataError("spearman: needs at least 2 samples");
  return pearson(average_ranks(preds), average_ranks(labels));
}

double ndcg(const std::vector<double>& preds, const std::vector<double>& labels, int64_t k) {
  if (preds.size() != labels.size()) throw DataError("ndcg: length mismatch");
  if (preds.empty()) throw DataError("ndcg: empty input");
  const int64_t n = static_cast<int64_t>(preds.size());
  k = std::min(k, n);
  if (k <= 0) throw DataError("ndcg: k must be positive");

  double shift = 0;
  for (const double y : labels) shift = std::min(shift, y);
  shift = shift < 0 ? -shift : 0.0;  // gains stay nonnegative

  std::vector<int64_t> by_pred(static_cast<size_t>(n)), by_label(static_cast<size_t>(n));
  std::iota(by_pred.begin(), by_pred.end(), int64_t{0});
  by_label = by_pred;
  std::stable_sort(by_pred.begin(), by_pred.end(), [&](int64_t a, int64_t b) {
    if (preds[static_cast<size_t>(a)] != preds[static_cast<size_t>(b)])
      return preds[static_cast<size_t>(a)] > preds[static_cast<size_t>(b)];
    return a < b;  // prediction ties break by node id
  });
  std::stable_sort(by_label.begin(), by_label.end(), [&](int64_t a, int64_t b) {
    return labels[static_cast<size_t>(a)] > labels[static_cast<size_t>(b)];
  });

  double dcg = 0, idcg = 0;
  for (int64_t pos = 0; pos < k; ++pos) {
    const double disc = 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    dcg += (labels[static_cast<size_t>(by_pred[static_cast<size_t>(pos)])] + shift) * disc;
    idcg += (labels[static_cast<size_t>(by_label[static_cast<size_t>(pos)])] + shift) * disc;
  }
  return idcg > 0 ? dcg / idcg : kNaN;
}

EvalReport evaluate_predictions(const std::vector<double>& preds, const std::vector<double>& labels,
                                const std::vector<std::string>& type_names, int64_t ndcg_k) {
  if (preds.size() != labels.size() || preds.size() != type_names.size())
    throw DataError("evaluate_predictions: length mismatch");
  EvalReport rep;
  rep.ndcg_k = ndcg_k;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (size_t i = 0; i < preds.size(); ++i) {
    groups[type_names[i]].first.push_back(preds[i]);
    groups[type_names[i]].second.push_back(labels[i]);
  }
  const auto fill = [&](const std::vector<double>& p, const std::vector<double>& y, SplitMetrics& out) {
    const auto rm = regression_metrics(p, y);
    out.mae = rm.mae;
    out.rmse = rm.rmse;
    out.nrmse = rm.nrmse;
    out.ndcg = ndcg(p, y, ndcg_k);
    out.spearman = p.size() >= 2 ? spearman(p, y) : kNaN;
  };
  for (const auto& [name, py] : groups) fill(py.first, py.second, rep.per_type[name]);
  fill(preds, labels, rep.micro);
  return rep;
}

}  // namespace hinimp
