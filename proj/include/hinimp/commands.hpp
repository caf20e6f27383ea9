#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hinimp/config.hpp"
#include "hinimp/graph.hpp"
#include "hinimp/knowledge.hpp"
#include "hinimp/metrics.hpp"
#include "hinimp/model.hpp"
#include "hinimp/training.hpp"

namespace hinimp {

// Graph + metapaths as the trainable pipeline sees them (wo_nh collapses types).
struct PipelineInputs {
  HeterogeneousGraph graph;
  std::vector<Metapath> metapaths;
  std::string cache_key;  // digest of everything preprocessing depends on
};

PipelineInputs prepare_inputs(const RunConfig& rc);

struct PreprocessOutcome {
  KnowledgeBank bank;
  bool cache_hit = false;
  std::string cache_key;
};

struct FoldOutcome {
  int fold = 0;
  TrainResult result;
  EvalReport test_report;
};

struct ExperimentResult {
  std::vector<FoldOutcome> folds;
  SplitMetrics aggregate;  // arithmetic mean of per-fold test micro metrics
  std::string version;
  double wall_ms = 0;
};

void cmd_generate(const RunConfig& rc);
PreprocessOutcome cmd_preprocess(const RunConfig& rc);
ExperimentResult cmd_train(const RunConfig& rc);
EvalReport cmd_evaluate(const RunConfig& rc);
std::vector<std::pair<std::string, double>> cmd_predict(const RunConfig& rc);
void cmd_ablate(const RunConfig& rc);

// deterministic CSV cell formatting shared by all writers
std::string format_double(double v);
void write_metric_csv(const std::string& path, const std::vector<EpochRow>& rows);

// Minimal polyline chart (MAE/RMSE vs ablation fraction).
void write_ablation_svg(const std::string& path, const std::vector<double>& fractions,
                        const std::vector<double>& mae, const std::vector<double>& rmse);

int thread_budget();  // HINIMP_THREADS, default hardware concurrency

}  // namespace hinimp
