#include "hinimp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hinimp/errors.hpp"

namespace hinimp {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
  KeyValueConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int64_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected `key = value`, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': not a number: '" + it->second + "'");
  }
}

int64_t KeyValueConfig::get_int(const std::string& key, int64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': not an integer: '" + it->second + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "on" || it->second == "1") return true;
  if (it->second == "false" || it->second == "off" || it->second == "0") return false;
  throw UsageError("config key '" + key + "': expected true/false, got '" + it->second + "'");
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

void KeyValueConfig::check_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("unknown config key '" + key + "' (see --help for the key list)");
  }
}

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "data.nodes", "data.edges", "data.features", "data.feature_dim",
      "synthetic.node_types", "synthetic.edges", "synthetic.bidirectional", "synthetic.feature_dim",
      "synthetic.labeled_types", "synthetic.label_transform", "synthetic.label_scale",
      "synthetic.label_offset", "synthetic.label_noise", "synthetic.label_noise_mode",
      "metapath.max_nodes", "metapath.list",
      "knowledge.walks", "knowledge.walk_length", "knowledge.window", "knowledge.p", "knowledge.q",
      "knowledge.negatives", "knowledge.epochs", "knowledge.pathsim_topk", "knowledge.disable_fraction",
      "model.heads", "model.head_dim", "model.layers", "model.attn_hidden", "model.mlp_hidden",
      "model.variant",
      "train.epochs", "train.lr", "train.l2", "train.margin", "train.ranking_weight", "train.triplets",
      "train.patience", "train.target_transform", "train.folds", "train.log_timing", "train.ndcg_k",
      "eval.checkpoint", "eval.fold", "eval.split",
      "predict.checkpoint", "predict.nodes",
      "ablate.fractions",
      "seed", "out",
  };
  return keys;
}

SyntheticSpec parse_synthetic(const KeyValueConfig& kv, uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  for (const auto& item : split(kv.get("synthetic.node_types", ""), ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw UsageError("synthetic.node_types: expected `name:count`, got '" + item + "'");
    spec.node_counts.emplace_back(parts[0], std::stoll(parts[1]));
  }
  // rule form: etype:src->dst:per_dst:uniform|preferential
  for (const auto& item : split(kv.get("synthetic.edges", ""), ';')) {
    const auto parts = split(item, ':');
    if (parts.size() != 4) throw UsageError("synthetic.edges rule: expected `etype:src->dst:m:attachment`, got '" + item + "'");
    SyntheticEdgeRule rule;
    rule.etype = parts[0];
    const size_t arrow = parts[1].find("->");
    if (arrow == std::string::npos) throw UsageError("synthetic.edges rule: expected `src->dst` in '" + item + "'");
    rule.src_type = trim(parts[1].substr(0, arrow));
    rule.dst_type = trim(parts[1].substr(arrow + 2));
    rule.per_dst = static_cast<int>(std::stoll(parts[2]));
    if (parts[3] == "uniform") rule.attachment = Attachment::Uniform;
    else if (parts[3] == "preferential") rule.attachment = Attachment::Preferential;
    else throw UsageError("synthetic.edges rule: unknown attachment '" + parts[3] + "'");
    spec.edge_rules.push_back(rule);
  }
  spec.bidirectional = kv.get_bool("synthetic.bidirectional", true);
  spec.feature_dim = kv.get_int("synthetic.feature_dim", 8);
  spec.labeled_types = split(kv.get("synthetic.labeled_types", ""), ',');
  const std::string tf = kv.get("synthetic.label_transform", "linear");
  if (tf == "linear") spec.label_transform = LabelTransform::Linear;
  else if (tf == "sqrt") spec.label_transform = LabelTransform::Sqrt;
  else if (tf == "log1p") spec.label_transform = LabelTransform::Log1p;
  else throw UsageError("synthetic.label_transform: unknown '" + tf + "'");
  spec.label_scale = kv.get_double("synthetic.label_scale", 1.0);
  spec.label_offset = kv.get_double("synthetic.label_offset", 0.0);
  spec.label_noise = kv.get_double("synthetic.label_noise", 0.0);
  const std::string nm = kv.get("synthetic.label_noise_mode", "absolute");
  if (nm == "absolute") spec.noise_relative = false;
  else if (nm == "relative") spec.noise_relative = true;
  else throw UsageError("synthetic.label_noise_mode: expected absolute|relative, got '" + nm + "'");
  return spec;
}

}  // namespace

RunConfig RunConfig::from_config(const KeyValueConfig& kv) {
  kv.check_known(known_keys());
  RunConfig rc;
  rc.seed = static_cast<uint64_t>(kv.get_int("seed", 7));
  rc.out_dir = kv.get("out", "out");

  rc.nodes_path = kv.get("data.nodes", "");
  rc.edges_path = kv.get("data.edges", "");
  rc.features_path = kv.get("data.features", "");
  rc.feature_dim = kv.get_int("data.feature_dim", 16);
  rc.has_synthetic = kv.has("synthetic.node_types");
  if (rc.has_synthetic && !rc.nodes_path.empty())
    throw UsageError("config: specify exactly one of data.* and synthetic.*");
  if (!rc.has_synthetic && rc.nodes_path.empty())
    throw UsageError("config: needs either data.nodes/data.edges or synthetic.*");
  if (!rc.nodes_path.empty() && rc.edges_path.empty())
    throw UsageError("config: data.nodes requires data.edges");
  if (rc.has_synthetic) rc.synthetic = parse_synthetic(kv, rc.seed);

  rc.metapath_list = split(kv.get("metapath.list", ""), ';');
  rc.metapath_max_nodes = static_cast<int>(kv.get_int("metapath.max_nodes", 3));

  rc.knowledge.node2vec.walks_per_node = static_cast<int>(kv.get_int("knowledge.walks", 10));
  rc.knowledge.node2vec.walk_length = static_cast<int>(kv.get_int("knowledge.walk_length", 40));
  rc.knowledge.node2vec.window = static_cast<int>(kv.get_int("knowledge.window", 5));
  rc.knowledge.node2vec.p = kv.get_double("knowledge.p", 1.0);
  rc.knowledge.node2vec.q = kv.get_double("knowledge.q", 1.0);
  rc.knowledge.node2vec.negatives = static_cast<int>(kv.get_int("knowledge.negatives", 5));
  rc.knowledge.node2vec.epochs = static_cast<int>(kv.get_int("knowledge.epochs", 5));
  rc.knowledge.pathsim_top_k = static_cast<int>(kv.get_int("knowledge.pathsim_topk", 10));
  rc.knowledge.seed = rc.seed;
  rc.disable_fraction = kv.get_double("knowledge.disable_fraction", 0.0);

  rc.model.heads = static_cast<int>(kv.get_int("model.heads", 4));
  rc.model.head_dim = static_cast<int>(kv.get_int("model.head_dim", 32));
  rc.model.layers = static_cast<int>(kv.get_int("model.layers", 2));
  rc.model.attn_hidden = static_cast<int>(kv.get_int("model.attn_hidden", 64));
  rc.model.mlp_hidden = static_cast<int>(kv.get_int("model.mlp_hidden", 64));
  rc.model.variant = parse_variant(kv.get("model.variant", "full"));
  rc.model.seed = rc.seed;

  rc.train.epochs = static_cast<int>(kv.get_int("train.epochs", 1000));
  rc.train.lr = kv.get_double("train.lr", 1e-3);
  rc.train.l2 = kv.get_double("train.l2", 1e-4);
  rc.train.margin = kv.get_double("train.margin", 1.0);
  rc.train.ranking_weight = kv.get_double("train.ranking_weight", 0.0);
  rc.train.triplets = static_cast<int>(kv.get_int("train.triplets", 64));
  rc.train.patience = static_cast<int>(kv.get_int("train.patience", 50));
  const std::string tt = kv.get("train.target_transform", "identity");
  if (tt == "identity") rc.train.transform = TargetTransform::Identity;
  else if (tt == "log1p") rc.train.transform = TargetTransform::Log1p;
  else throw UsageError("train.target_transform: expected identity|log1p, got '" + tt + "'");
  const std::string lt = kv.get("train.log_timing", "off");
  if (lt == "off") rc.train.log_timing = false;
  else if (lt == "wall") rc.train.log_timing = true;
  else throw UsageError("train.log_timing: expected off|wall, got '" + lt + "'");
  rc.train.ndcg_k = kv.get_int("train.ndcg_k", 100);
  rc.train.seed = rc.seed;
  if (rc.train.margin <= 0 && rc.train.ranking_weight > 0)
    throw UsageError("train.margin must be > 0 when ranking is enabled");

  const std::string folds = kv.get("train.folds", "0");
  rc.train_folds.clear();
  if (folds == "all") {
    for (int f = 0; f < kFoldCount; ++f) rc.train_folds.push_back(f);
  } else {
    for (const auto& tok : split(folds, ',')) {
      const int f = static_cast<int>(std::stoll(tok));
      if (f < 0 || f >= kFoldCount) throw UsageError("train.folds: fold index out of range: " + tok);
      rc.train_folds.push_back(f);
    }
  }

  rc.checkpoint_path = kv.get("eval.checkpoint", kv.get("predict.checkpoint", ""));
  rc.eval_fold = static_cast<int>(kv.get_int("eval.fold", 0));
  rc.eval_split = kv.get("eval.split", "test");
  rc.predict_nodes = split(kv.get("predict.nodes", ""), ',');

  rc.ablate_fractions.clear();
  for (const auto& tok : split(kv.get("ablate.fractions", "0,0.2,0.4,0.6,0.8"), ','))
    rc.ablate_fractions.push_back(std::stod(tok));

  return rc;
}

std::string RunConfig::describe_keys() {
  return R"(config keys (flat `key = value`, '#' comments):
  data.nodes / data.edges / data.features   TSV paths (features optional)
  data.feature_dim        width of synthesized features when none given (16)
  synthetic.node_types    name:count,name:count,...
  synthetic.edges         etype:src->dst:per_dst:uniform|preferential; ...
  synthetic.bidirectional also emit reversed edges, same type name (true)
  synthetic.feature_dim   (8)
  synthetic.labeled_types comma-separated type names
  synthetic.label_transform  linear|sqrt|log1p of total degree (linear)
  synthetic.label_scale / synthetic.label_offset   affine label map (1, 0)
  synthetic.label_noise   gaussian std (0); synthetic.label_noise_mode absolute|relative
  metapath.max_nodes      enumeration bound on node slots (3)
  metapath.list           `A[e]P[e]A; ...` overrides enumeration
  knowledge.walks(10) .walk_length(40) .window(5) .p(1) .q(1) .negatives(5) .epochs(5)
  knowledge.pathsim_topk  peers kept per node in the PathSim walk graph (10)
  knowledge.disable_fraction  zeroed knowledge slots fraction (0)
  model.heads(4) model.head_dim(32) model.layers(2) model.attn_hidden(64) model.mlp_hidden(64)
  model.variant           full|wo_wd|wo_lambda|wo_nh|wo_att (full)
  train.epochs(1000) train.lr(1e-3) train.l2(1e-4) train.margin(1.0)
  train.ranking_weight(0) train.triplets(64) train.patience(50)
  train.target_transform  identity|log1p (identity)
  train.folds             `0`, `0,2,4`, or `all` (0)
  train.log_timing        off|wall; wall writes nondeterministic epoch_ms (off)
  train.ndcg_k(100)
  eval.checkpoint eval.fold(0) eval.split train|val|test (test)
  predict.checkpoint predict.nodes   comma-separated original ids
  ablate.fractions        (0,0.2,0.4,0.6,0.8)
  seed(7) out(out)
)";
}

}  // namespace hinimp
