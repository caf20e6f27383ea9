#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hinimp/graph.hpp"
#include "hinimp/metrics.hpp"
#include "hinimp/model.hpp"
#include "hinimp/tensor.hpp"

namespace hinimp {

inline constexpr int kFoldCount = 5;

struct FoldSplit {
  std::vector<NodeId> train, val, test;
};

// Stratified by node type; the 5 test sets partition the labeled nodes;
// validation = floor(15%) of the remaining training nodes per type.
struct FoldPlan {
  std::array<FoldSplit, kFoldCount> folds;
};

FoldPlan make_folds(const HeterogeneousGraph& g, uint64_t seed);

enum class TargetTransform { Identity, Log1p };

struct TrainConfig {
  int epochs = 1000;
  double lr = 1e-3;
  double l2 = 1e-4;          // mu of the regularizer
  double margin = 1.0;       // m of the ranking supplement
  double ranking_weight = 0; // 0 disables the ranking loss
  int triplets = 64;         // triplets per epoch when ranking is enabled
  int patience = 50;         // early stop on validation MAE
  TargetTransform transform = TargetTransform::Identity;
  bool log_timing = false;   // write wall-clock into the CSV epoch_ms column
  int64_t ndcg_k = 100;
  uint64_t seed = 0;
};

// Eq-16 style double mean: mean over labeled types of per-type MSE.
Tensor mse_loss(const Tensor& scores, const std::vector<double>& targets,
                const std::vector<TypeId>& type_of, const std::vector<TypeId>& labeled_types);

// mu * sum of squared L2 norms over all trainable tensors.
Tensor l2_regularizer(const std::vector<std::pair<std::string, Tensor>>& params, double mu);

// max{0, m + (g_i - g_plus) - (g_i - g_minus)}
Tensor margin_ranking_loss(const Tensor& g_i, const Tensor& g_plus, const Tensor& g_minus, double m);

struct Triplet {
  NodeId anchor, pos, neg;
};

// Uniform same-type triplets with |y_pos - y_anchor| > |y_neg - y_anchor|,
// deterministic per seed; returns fewer (with a stderr warning) when the
// filter cannot be satisfied after 100x oversampling.
std::vector<Triplet> sample_triplets(const HeterogeneousGraph& g, const std::vector<NodeId>& pool,
                                     int count, uint64_t seed);

struct EpochRow {
  int epoch = 0;
  int fold = 0;
  std::string split;
  SplitMetrics metrics;
  double loss = 0;
  int64_t epoch_ms = 0;
};

struct TrainResult {
  int best_epoch = 0;
  double best_val_mae = 0;
  std::vector<EpochRow> log;
  EvalReport test_report;        // at the restored best-validation parameters
  std::vector<double> epoch_ms;  // measured per epoch regardless of log_timing
  double total_ms = 0;
  std::vector<double> train_loss_per_epoch;
};

// Full-batch training over the labeled nodes of one fold. The model is
// updated in place and left at the best-validation parameters.
TrainResult train_model(ImportanceModel& model, const HeterogeneousGraph& g, const FoldSplit& fold,
                        int fold_index, const TrainConfig& cfg);

// Metrics of the current parameters on an explicit node set (original label space).
EvalReport evaluate_model(const ImportanceModel& model, const HeterogeneousGraph& g,
                          const std::vector<NodeId>& nodes, TargetTransform transform, int64_t ndcg_k);

double apply_transform(double y, TargetTransform t);
double invert_transform(double y, TargetTransform t);

}  // namespace hinimp
