#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hinimp/graph.hpp"
#include "hinimp/knowledge.hpp"
#include "hinimp/model.hpp"
#include "hinimp/training.hpp"

namespace hinimp {

// Flat `key = value` file, '#' comments. Unknown keys are usage errors.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  // Throws UsageError when a present key is not in the known set.
  void check_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> entries_;
};

struct RunConfig {
  // exactly one of the two sources
  std::string nodes_path, edges_path, features_path;
  bool has_synthetic = false;
  SyntheticSpec synthetic;
  int64_t feature_dim = 16;  // synthesized width when no features are given

  std::vector<std::string> metapath_list;  // overrides enumeration when nonempty
  int metapath_max_nodes = 3;

  KnowledgeParams knowledge;
  double disable_fraction = 0.0;

  ModelConfig model;
  TrainConfig train;
  std::vector<int> train_folds = {0};

  std::string checkpoint_path;  // evaluate/predict input
  int eval_fold = 0;
  std::string eval_split = "test";
  std::vector<std::string> predict_nodes;

  std::vector<double> ablate_fractions = {0.0, 0.2, 0.4, 0.6, 0.8};

  uint64_t seed = 7;
  std::string out_dir = "out";

  static RunConfig from_config(const KeyValueConfig& kv);
  // The documented key set with defaults, printed by --help.
  static std::string describe_keys();
};

}  // namespace hinimp
