#include "hinimp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace hinimp {

double apply_transform(double y, TargetTransform t) {
  return t == TargetTransform::Log1p ? std::log1p(y) : y;
}

double invert_transform(double y, TargetTransform t) {
  return t == TargetTransform::Log1p ? std::expm1(y) : y;
}

FoldPlan make_folds(const HeterogeneousGraph& g, uint64_t seed) {
  FoldPlan plan;
  for (const TypeId t : g.labeled_types()) {
    std::vector<NodeId> nodes = g.labeled_nodes_of_type(t);
    if (nodes.size() < kFoldCount)
      throw DataError("make_folds: type '" + g.node_type_name(t) + "' has only " + std::to_string(nodes.size()) +
                      " labeled nodes; needs >= " + std::to_string(kFoldCount));
    Rng rng(mix_seed(seed, "folds", static_cast<uint64_t>(t)));
    rng.shuffle(nodes);

    const size_t n = nodes.size();
    const size_t base = n / kFoldCount, extra = n % kFoldCount;
    size_t start = 0;
    for (int f = 0; f < kFoldCount; ++f) {
      const size_t len = base + (static_cast<size_t>(f) < extra ? 1 : 0);
      auto& split = plan.folds[static_cast<size_t>(f)];
      split.test.insert(split.test.end(), nodes.begin() + static_cast<int64_t>(start),
                        nodes.begin() + static_cast<int64_t>(start + len));
      std::vector<NodeId> rest;
      rest.insert(rest.end(), nodes.begin(), nodes.begin() + static_cast<int64_t>(start));
      rest.insert(rest.end(), nodes.begin() + static_cast<int64_t>(start + len), nodes.end());
      const size_t n_val = static_cast<size_t>(std::floor(0.15 * static_cast<double>(rest.size())));
      split.val.insert(split.val.end(), rest.begin(), rest.begin() + static_cast<int64_t>(n_val));
      split.train.insert(split.train.end(), rest.begin() + static_cast<int64_t>(n_val), rest.end());
      start += len;
    }
  }
  for (auto& split : plan.folds) {
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
  }
  return plan;
}

Tensor mse_loss(const Tensor& scores, const std::vector<double>& targets,
                const std::vector<TypeId>& type_of, const std::vector<TypeId>& labeled_types) {
  if (labeled_types.empty()) throw DataError("mse_loss: empty labeled type set");
  if (static_cast<size_t>(scores.numel()) != targets.size() || targets.size() != type_of.size())
    throw DataError("mse_loss: length mismatch");
  Tensor acc;
  for (const TypeId t : labeled_types) {
    std::vector<int64_t> idx;
    std::vector<double> y;
    for (size_t i = 0; i < type_of.size(); ++i)
      if (type_of[i] == t) {
        idx.push_back(static_cast<int64_t>(i));
        y.push_back(targets[i]);
      }
    if (idx.empty()) continue;
    const Tensor diff = sub(gather(scores, idx), Tensor::from({static_cast<int64_t>(y.size())}, y));
    const Tensor per_type = mean(square(diff));
    acc = acc.defined() ? add(acc, per_type) : per_type;
  }
  if (!acc.defined()) throw DataError("mse_loss: no scored node belongs to a labeled type");
  return scalar_mul(acc, 1.0 / static_cast<double>(labeled_types.size()));
}

Tensor l2_regularizer(const std::vector<std::pair<std::string, Tensor>>& params, double mu) {
  if (mu < 0) throw DataError("l2_regularizer: mu must be >= 0");
  Tensor acc = Tensor::scalar(0.0);
  for (const auto& [name, p] : params) {
    const Tensor term = sum(square(p));
    acc = add(acc, term);
  }
  return scalar_mul(acc, mu);
}

Tensor margin_ranking_loss(const Tensor& g_i, const Tensor& g_plus, const Tensor& g_minus, double m) {
  const Tensor diff = add(sub(g_i, g_plus), sub(g_minus, g_i));  // m - g_+ + g_- after adding margin
  return relu(add(diff, Tensor::scalar(m)));
}

std::vector<Triplet> sample_triplets(const HeterogeneousGraph& g, const std::vector<NodeId>& pool,
                                     int count, uint64_t seed) {
  std::map<TypeId, std::vector<NodeId>> by_type;
  for (const NodeId v : pool)
    if (g.has_label(v)) by_type[g.node_type(v)].push_back(v);
  std::vector<const std::vector<NodeId>*> eligible;
  for (const auto& [t, nodes] : by_type)
    if (nodes.size() >= 3) eligible.push_back(&nodes);
  if (eligible.empty()) throw DataError("sample_triplets: need >= 3 labeled nodes of one type");

  Rng rng(mix_seed(seed, "triplets"));
  std::vector<Triplet> out;
  int64_t attempts = 0;
  const int64_t max_attempts = static_cast<int64_t>(count) * 100;
  while (static_cast<int>(out.size()) < count && attempts < max_attempts) {
    ++attempts;
    const auto& nodes = *eligible[rng.below(eligible.size())];
    const NodeId a = nodes[rng.below(nodes.size())];
    const NodeId p = nodes[rng.below(nodes.size())];
    const NodeId n = nodes[rng.below(nodes.size())];
    if (a == p || a == n || p == n) continue;
    if (std::abs(g.label(p) - g.label(a)) > std::abs(g.label(n) - g.label(a))) out.push_back({a, p, n});
  }
  if (static_cast<int>(out.size()) < count)
    std::cerr << "warning: sample_triplets produced " << out.size() << "/" << count
              << " triplets after 100x oversampling\n";
  return out;
}

namespace {

struct ScoredSet {
  std::vector<NodeId> nodes;          // all labeled nodes, ascending
  std::vector<int64_t> index_of;      // node id -> position (or -1)
  std::vector<TypeId> type_of;        // per scored node
  std::vector<double> target;         // transformed labels
  std::vector<double> raw_label;      // original labels
};

ScoredSet collect_scored(const HeterogeneousGraph& g, TargetTransform tf) {
  ScoredSet s;
  s.nodes = g.labeled_nodes();
  s.index_of.assign(static_cast<size_t>(g.node_count()), -1);
  for (size_t i = 0; i < s.nodes.size(); ++i) {
    s.index_of[static_cast<size_t>(s.nodes[i])] = static_cast<int64_t>(i);
    s.type_of.push_back(g.node_type(s.nodes[i]));
    s.raw_label.push_back(g.label(s.nodes[i]));
    s.target.push_back(apply_transform(g.label(s.nodes[i]), tf));
  }
  return s;
}

SplitMetrics split_metrics(const ScoredSet& s, const std::vector<double>& all_scores,
                           const std::vector<NodeId>& subset, const HeterogeneousGraph& g,
                           TargetTransform tf, int64_t ndcg_k) {
  std::vector<double> preds, labels;
  std::vector<std::string> types;
  for (const NodeId v : subset) {
    const int64_t i = s.index_of[static_cast<size_t>(v)];
    preds.push_back(invert_transform(all_scores[static_cast<size_t>(i)], tf));
    labels.push_back(s.raw_label[static_cast<size_t>(i)]);
    types.push_back(g.node_type_name(g.node_type(v)));
  }
  const EvalReport rep = evaluate_predictions(preds, labels, types, ndcg_k);
  return rep.micro;
}

}  // namespace

EvalReport evaluate_model(const ImportanceModel& model, const HeterogeneousGraph& g,
                          const std::vector<NodeId>& nodes, TargetTransform transform, int64_t ndcg_k) {
  const auto fw = model.forward(nodes);
  std::vector<double> preds, labels;
  std::vector<std::string> types;
  for (size_t i = 0; i < nodes.size(); ++i) {
    preds.push_back(invert_transform(fw.scores.data()[i], transform));
    labels.push_back(g.label(nodes[i]));
    types.push_back(g.node_type_name(g.node_type(nodes[i])));
  }
  return evaluate_predictions(preds, labels, types, ndcg_k);
}

TrainResult train_model(ImportanceModel& model, const HeterogeneousGraph& g, const FoldSplit& fold,
                        int fold_index, const TrainConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  TrainResult res;
  const ScoredSet scored = collect_scored(g, cfg.transform);

  Adam adam(AdamConfig{cfg.lr});
  for (const auto& [name, p] : model.parameters()) adam.add_param(name, p);

  std::vector<std::vector<double>> best_values;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  const auto snapshot = [&] {
    best_values.clear();
    for (const auto& [name, p] : model.parameters()) best_values.push_back(p.data());
  };
  const auto restore = [&] {
    if (best_values.empty()) return;
    size_t i = 0;
    for (auto [name, p] : model.parameters()) p.data() = best_values[i++];  // handles share storage
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto e_start = std::chrono::steady_clock::now();

    const auto fw = model.forward(scored.nodes);

    // train loss on the train subset
    std::vector<int64_t> train_idx;
    std::vector<double> train_targets;
    std::vector<TypeId> train_types;
    for (const NodeId v : fold.train) {
      const int64_t i = scored.index_of[static_cast<size_t>(v)];
      train_idx.push_back(i);
      train_targets.push_back(scored.target[static_cast<size_t>(i)]);
      train_types.push_back(scored.type_of[static_cast<size_t>(i)]);
    }
    const Tensor train_scores = gather(fw.scores, train_idx);
    Tensor loss = add(mse_loss(train_scores, train_targets, train_types, g.labeled_types()),
                      l2_regularizer(model.parameters(), cfg.l2));
    if (cfg.ranking_weight > 0) {
      const auto triplets = sample_triplets(g, fold.train, cfg.triplets,
                                            mix_seed(cfg.seed, "epoch-triplets", static_cast<uint64_t>(epoch)));
      if (!triplets.empty()) {
        std::vector<int64_t> ai, pi, ni;
        for (const auto& t : triplets) {
          ai.push_back(scored.index_of[static_cast<size_t>(t.anchor)]);
          pi.push_back(scored.index_of[static_cast<size_t>(t.pos)]);
          ni.push_back(scored.index_of[static_cast<size_t>(t.neg)]);
        }
        const Tensor mrl = margin_ranking_loss(gather(fw.scores, ai), gather(fw.scores, pi),
                                               gather(fw.scores, ni), cfg.margin);
        loss = add(loss, scalar_mul(mean(mrl), cfg.ranking_weight));
      }
    }
    const double loss_value = loss.value();
    if (std::isnan(loss_value))
      throw NumericError("training diverged: NaN loss at epoch " + std::to_string(epoch));
    res.train_loss_per_epoch.push_back(loss_value);

    // metrics of this epoch's forward, in the original label space
    const std::vector<double>& all_scores = fw.scores.data();
    const auto log_split = [&](const std::string& name, const std::vector<NodeId>& subset, double row_loss) {
      if (subset.empty()) return;
      EpochRow row;
      row.epoch = epoch;
      row.fold = fold_index;
      row.split = name;
      row.metrics = split_metrics(scored, all_scores, subset, g, cfg.transform, cfg.ndcg_k);
      row.loss = row_loss;
      res.log.push_back(row);
    };

    backward(loss);
    adam.step();

    const auto e_end = std::chrono::steady_clock::now();
    const double ems = std::chrono::duration<double, std::milli>(e_end - e_start).count();
    res.epoch_ms.push_back(ems);

    const size_t first_row = res.log.size();
    log_split("train", fold.train, loss_value);
    const size_t val_row = res.log.size();
    log_split("val", fold.val, 0.0);
    log_split("test", fold.test, 0.0);
    if (cfg.log_timing)
      for (size_t i = first_row; i < res.log.size(); ++i)
        res.log[i].epoch_ms = static_cast<int64_t>(std::llround(ems));

    double val_mae = res.log.size() > val_row ? res.log[val_row].metrics.mae : loss_value;
    if (val_mae < best_val - 1e-12) {
      best_val = val_mae;
      res.best_epoch = epoch;
      since_best = 0;
      snapshot();
    } else if (++since_best > cfg.patience) {
      break;
    }
  }

  restore();
  res.best_val_mae = best_val;
  res.test_report = evaluate_model(model, g, fold.test.empty() ? fold.train : fold.test, cfg.transform, cfg.ndcg_k);
  res.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace hinimp
