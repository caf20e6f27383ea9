#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hinimp {

struct RegressionMetrics {
  double mae = 0;
  double rmse = 0;
  double nrmse = 0;  // rmse / label range; NaN when labels are constant
};

RegressionMetrics regression_metrics(const std::vector<double>& preds, const std::vector<double>& labels);

// Pearson correlation of average-ranked values (ties get mean ranks);
// NaN when either side has zero rank variance.
double spearman(const std::vector<double>& preds, const std::vector<double>& labels);

// Gain = label (shifted to nonnegative when negatives present), discount
// 1/log2(pos+1), over the top-k by predicted score; normalized by the ideal
// ordering. Prediction ties break by index. k > n is clamped to n.
double ndcg(const std::vector<double>& preds, const std::vector<double>& labels, int64_t k);

struct SplitMetrics {
  double mae = 0, rmse = 0, nrmse = 0, ndcg = 0, spearman = 0;
};

struct EvalReport {
  std::map<std::string, SplitMetrics> per_type;  // keyed by node type name
  SplitMetrics micro;                            // pooled over all labeled nodes
  int64_t ndcg_k = 100;
};

EvalReport evaluate_predictions(const std::vector<double>& preds, const std::vector<double>& labels,
                                const std::vector<std::string>& type_names, int64_t ndcg_k);

}  // namespace hinimp
