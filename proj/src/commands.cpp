#include "hinimp/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <thread>

#include "hinimp/checkpoint.hpp"
#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hinimp {

namespace {

constexpr const char* kVersion = "hinimp 0.1.0";

uint64_t fnv1a(uint64_t h, const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fingerprint_graph(const HeterogeneousGraph& g) {
  uint64_t h = 0xcbf29ce484222325ULL;
  const int64_t n = g.node_count();
  h = fnv1a(h, &n, sizeof(n));
  for (NodeId v = 0; v < n; ++v) {
    const TypeId t = g.node_type(v);
    h = fnv1a(h, &t, sizeof(t));
    h = fnv1a(h, g.orig_id(v).data(), g.orig_id(v).size());
    if (g.has_label(v)) {
      const double y = g.label(v);
      h = fnv1a(h, &y, sizeof(y));
    }
    if (g.has_features()) h = fnv1a(h, g.feature(v).data(), g.feature(v).size() * sizeof(double));
  }
  for (const auto& e : g.edges()) {
    h = fnv1a(h, &e.src, sizeof(e.src));
    h = fnv1a(h, &e.dst, sizeof(e.dst));
    h = fnv1a(h, &e.etype, sizeof(e.etype));
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

HeterogeneousGraph load_dataset(const RunConfig& rc) {
  if (rc.has_synthetic) return generate_synthetic(rc.synthetic);
  HeterogeneousGraph g = load_graph(rc.nodes_path, rc.edges_path, rc.features_path);
  if (!g.has_features()) g.synthesize_features(rc.feature_dim, rc.seed);
  return g;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw DataError("cannot create directory: " + path);
}

}  // namespace

int thread_budget() {
  if (const char* env = std::getenv("HINIMP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 2;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

PipelineInputs prepare_inputs(const RunConfig& rc) {
  PipelineInputs in;
  HeterogeneousGraph raw = load_dataset(rc);
  const auto violations = raw.validate();
  if (!violations.empty()) {
    std::string msg = "dataset invalid:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw DataError(msg);
  }
  const bool homogeneous = rc.model.variant == Variant::WoNh;
  in.graph = homogeneous ? raw.homogenized() : std::move(raw);

  if (homogeneous) {
    // plain 2-hop metapath on the collapsed schema
    in.metapaths.push_back(parse_metapath(in.graph, "node[link]node[link]node"));
  } else if (!rc.metapath_list.empty()) {
    for (const auto& text : rc.metapath_list) {
      Metapath p = parse_metapath(in.graph, text);
      if (!schema_valid(in.graph, p)) throw DataError("metapath '" + text + "' is not schema-valid for this graph");
      in.metapaths.push_back(std::move(p));
    }
  } else {
    in.metapaths = enumerate_metapaths(in.graph, rc.metapath_max_nodes);
    std::erase_if(in.metapaths,
                  [&](const Metapath& p) { return induce_subnetwork(in.graph, p).members.empty(); });
  }

  uint64_t h = fingerprint_graph(in.graph);
  for (const auto& p : in.metapaths) {
    const std::string s = p.to_string(in.graph);
    h = fnv1a(h, s.data(), s.size());
  }
  const auto& nv = rc.knowledge.node2vec;
  const double fields[] = {static_cast<double>(nv.walks_per_node), static_cast<double>(nv.walk_length),
                           static_cast<double>(nv.window), nv.p, nv.q, static_cast<double>(nv.negatives),
                           static_cast<double>(nv.epochs), static_cast<double>(rc.knowledge.pathsim_top_k),
                           static_cast<double>(rc.seed), homogeneous ? 1.0 : 0.0};
  h = fnv1a(h, fields, sizeof(fields));
  in.cache_key = hex64(h);
  return in;
}

void cmd_generate(const RunConfig& rc) {
  if (!rc.has_synthetic) throw UsageError("generate: config needs synthetic.* keys");
  const HeterogeneousGraph g = generate_synthetic(rc.synthetic);
  ensure_dir(rc.out_dir);
  save_graph(g, rc.out_dir + "/nodes.tsv", rc.out_dir + "/edges.tsv", rc.out_dir + "/features.tsv");
}

PreprocessOutcome cmd_preprocess(const RunConfig& rc) {
  PipelineInputs in = prepare_inputs(rc);
  PreprocessOutcome out;
  out.cache_key = in.cache_key;
  const std::string cache_dir = rc.out_dir + "/cache";
  const std::string bank_path = cache_dir + "/bank.bin";
  const std::string manifest_path = cache_dir + "/manifest.json";
  if (load_knowledge_bank(out.bank, bank_path, manifest_path, in.cache_key)) {
    out.cache_hit = true;
    return out;
  }
  KnowledgeParams params = rc.knowledge;
  params.seed = rc.seed;
  out.bank = build_knowledge_bank(in.graph, in.metapaths, params);
  ensure_dir(cache_dir);
  save_knowledge_bank(out.bank, bank_path, manifest_path, in.cache_key);
  return out;
}

namespace {

void run_bounded(std::vector<std::function<void()>> jobs, int max_threads) {
  const int budget = std::max(1, std::min<int>(max_threads, static_cast<int>(jobs.size())));
  if (budget == 1) {
    for (auto& j : jobs) j();
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs.size());
  for (int t = 0; t < budget; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          jobs[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

json model_manifest(const RunConfig& rc, const PipelineInputs& in, int fold, int best_epoch,
                    const ImportanceModel& model) {
  json m;
  m["version"] = kVersion;
  m["seed"] = rc.seed;
  m["variant"] = variant_name(rc.model.variant);
  m["heads"] = rc.model.heads;
  m["head_dim"] = rc.model.head_dim;
  m["layers"] = rc.model.layers;
  m["attn_hidden"] = rc.model.attn_hidden;
  m["mlp_hidden"] = rc.model.mlp_hidden;
  m["target_transform"] = rc.train.transform == TargetTransform::Log1p ? "log1p" : "identity";
  m["ndcg_k"] = rc.train.ndcg_k;
  m["fold"] = fold;
  m["best_epoch"] = best_epoch;
  m["cache_key"] = in.cache_key;
  m["graph_fingerprint"] = hex64(fingerprint_graph(in.graph));
  m["ref_seed"] = model.reference().seed;
  m["scoring_dim"] = model.scoring_dim();
  m["disable_fraction"] = rc.disable_fraction;
  return m;
}

KnowledgeBank load_bank_or_fail(const RunConfig& rc, const PipelineInputs& in) {
  KnowledgeBank bank;
  const std::string cache_dir = rc.out_dir + "/cache";
  if (!load_knowledge_bank(bank, cache_dir + "/bank.bin", cache_dir + "/manifest.json", in.cache_key))
    throw DataError("missing or stale preprocessing cache under " + cache_dir + " (run `hinimp preprocess` first)");
  if (rc.disable_fraction > 0) bank = disable_knowledge(bank, rc.disable_fraction, rc.seed);
  return bank;
}

}  // namespace

void write_metric_csv(const std::string& path, const std::vector<EpochRow>& rows) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write metric log: " + path);
  f << "epoch,fold,split,mae,rmse,nrmse,ndcg,spearman,loss,epoch_ms\n";
  for (const auto& r : rows) {
    f << r.epoch << ',' << r.fold << ',' << r.split << ',' << format_double(r.metrics.mae) << ','
      << format_double(r.metrics.rmse) << ',' << format_double(r.metrics.nrmse) << ','
      << format_double(r.metrics.ndcg) << ',' << format_double(r.metrics.spearman) << ','
      << format_double(r.loss) << ',' << r.epoch_ms << '\n';
  }
}

ExperimentResult cmd_train(const RunConfig& rc) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineInputs in = prepare_inputs(rc);
  const KnowledgeBank bank = load_bank_or_fail(rc, in);
  const FoldPlan plan = make_folds(in.graph, rc.seed);

  ExperimentResult res;
  res.version = kVersion;
  res.folds.resize(rc.train_folds.size());

  std::vector<std::function<void()>> jobs;
  for (size_t i = 0; i < rc.train_folds.size(); ++i) {
    jobs.push_back([&, i] {
      const int fold = rc.train_folds[i];
      ImportanceModel model(in.graph, bank, rc.model);
      TrainResult tr = train_model(model, in.graph, plan.folds[static_cast<size_t>(fold)], fold, rc.train);

      const std::string fold_dir = rc.out_dir + "/fold" + std::to_string(fold);
      ensure_dir(fold_dir);
      write_metric_csv(fold_dir + "/metrics.csv", tr.log);
      {
        std::ofstream tf(fold_dir + "/timing.csv");
        tf << "epoch,epoch_ms\n";
        for (size_t e = 0; e < tr.epoch_ms.size(); ++e)
          tf << e << ',' << format_double(tr.epoch_ms[e]) << '\n';
      }
      Checkpoint ck = Checkpoint::from_params(model.parameters(),
                                              model_manifest(rc, in, fold, tr.best_epoch, model).dump(2));
      ck.shapes.emplace_back("ref.h0", std::vector<int64_t>{model.scoring_dim()});
      ck.values["ref.h0"] = model.reference().h0;
      save_checkpoint(ck, fold_dir + "/checkpoint.bin");

      res.folds[i] = FoldOutcome{fold, std::move(tr), {}};
      res.folds[i].test_report = res.folds[i].result.test_report;
    });
  }
  run_bounded(std::move(jobs), thread_budget());

  auto& agg = res.aggregate;
  for (const auto& f : res.folds) {
    agg.mae += f.test_report.micro.mae;
    agg.rmse += f.test_report.micro.rmse;
    agg.nrmse += f.test_report.micro.nrmse;
    agg.ndcg += f.test_report.micro.ndcg;
    agg.spearman += f.test_report.micro.spearman;
  }
  const double n = static_cast<double>(std::max<size_t>(1, res.folds.size()));
  agg.mae /= n;
  agg.rmse /= n;
  agg.nrmse /= n;
  agg.ndcg /= n;
  agg.spearman /= n;

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  json out;
  out["version"] = res.version;
  out["cache_key"] = in.cache_key;
  out["wall_ms"] = res.wall_ms;
  out["aggregate"] = {{"mae", res.aggregate.mae},
                      {"rmse", res.aggregate.rmse},
                      {"nrmse", res.aggregate.nrmse},
                      {"ndcg", res.aggregate.ndcg},
                      {"spearman", res.aggregate.spearman}};
  for (const auto& f : res.folds) {
    json jf;
    jf["fold"] = f.fold;
    jf["best_epoch"] = f.result.best_epoch;
    jf["test"] = {{"mae", f.test_report.micro.mae},
                  {"rmse", f.test_report.micro.rmse},
                  {"nrmse", f.test_report.micro.nrmse},
                  {"ndcg", f.test_report.micro.ndcg},
                  {"spearman", f.test_report.micro.spearman}};
    out["folds"].push_back(jf);
  }
  ensure_dir(rc.out_dir);
  std::ofstream rf(rc.out_dir + "/result.json");
  rf << out.dump(2) << "\n";
  return res;
}

namespace {

struct RestoredModel {
  PipelineInputs in;
  KnowledgeBank bank;
  std::unique_ptr<ImportanceModel> model;
  json manifest;
};

RestoredModel restore_model(const RunConfig& rc) {
  if (rc.checkpoint_path.empty()) throw UsageError("missing eval.checkpoint / predict.checkpoint");
  const Checkpoint ck = load_checkpoint(rc.checkpoint_path);
  json manifest = json::parse(ck.manifest_json);

  if (manifest["seed"].get<uint64_t>() != rc.seed)
    throw DataError("reference-seed mismatch: checkpoint was trained with seed " +
                    std::to_string(manifest["seed"].get<uint64_t>()) + ", config has " + std::to_string(rc.seed));

  RunConfig eff = rc;
  eff.model.variant = parse_variant(manifest["variant"].get<std::string>());
  eff.model.heads = manifest["heads"].get<int>();
  eff.model.head_dim = manifest["head_dim"].get<int>();
  eff.model.layers = manifest["layers"].get<int>();
  eff.model.attn_hidden = manifest["attn_hidden"].get<int>();
  eff.model.mlp_hidden = manifest["mlp_hidden"].get<int>();
  eff.model.seed = rc.seed;
  eff.disable_fraction = manifest["disable_fraction"].get<double>();

  RestoredModel rm;
  rm.in = prepare_inputs(eff);
  if (hex64(fingerprint_graph(rm.in.graph)) != manifest["graph_fingerprint"].get<std::string>())
    throw DataError("checkpoint was trained on a different dataset (graph fingerprint mismatch)");
  rm.bank = load_bank_or_fail(eff, rm.in);
  rm.model = std::make_unique<ImportanceModel>(rm.in.graph, rm.bank, eff.model);
  ck.restore_into(rm.model->parameters());
  const auto it = ck.values.find("ref.h0");
  if (it == ck.values.end()) throw DataError("checkpoint is missing the reference distribution");
  rm.model->set_reference(
      ReferenceDistribution::from_values(it->second, manifest["ref_seed"].get<uint64_t>()));
  rm.manifest = std::move(manifest);
  return rm;
}

}  // namespace

EvalReport cmd_evaluate(const RunConfig& rc) {
  RestoredModel rm = restore_model(rc);
  const FoldPlan plan = make_folds(rm.in.graph, rc.seed);
  if (rc.eval_fold < 0 || rc.eval_fold >= kFoldCount) throw UsageError("eval.fold out of range");
  const auto& fold = plan.folds[static_cast<size_t>(rc.eval_fold)];
  const std::vector<NodeId>* split = &fold.test;
  if (rc.eval_split == "train") split = &fold.train;
  else if (rc.eval_split == "val") split = &fold.val;
  else if (rc.eval_split != "test") throw UsageError("eval.split must be train|val|test");

  const TargetTransform tf = rm.manifest["target_transform"].get<std::string>() == "log1p"
                                 ? TargetTransform::Log1p
                                 : TargetTransform::Identity;
  const EvalReport rep = evaluate_model(*rm.model, rm.in.graph, *split, tf, rc.train.ndcg_k);

  ensure_dir(rc.out_dir);
  json out;
  out["fold"] = rc.eval_fold;
  out["split"] = rc.eval_split;
  out["ndcg_k"] = rep.ndcg_k;
  out["micro"] = {{"mae", rep.micro.mae},
                  {"rmse", rep.micro.rmse},
                  {"nrmse", rep.micro.nrmse},
                  {"ndcg", rep.micro.ndcg},
                  {"spearman", rep.micro.spearman}};
  for (const auto& [type, m] : rep.per_type)
    out["per_type"][type] = {{"mae", m.mae}, {"rmse", m.rmse}, {"nrmse", m.nrmse}, {"ndcg", m.ndcg},
                             {"spearman", m.spearman}};
  std::ofstream jf(rc.out_dir + "/report.json");
  jf << out.dump(2) << "\n";

  std::vector<EpochRow> rows;
  EpochRow row;
  row.epoch = rm.manifest["best_epoch"].get<int>();
  row.fold = rc.eval_fold;
  row.split = rc.eval_split;
  row.metrics = rep.micro;
  row.loss = rep.micro.rmse * rep.micro.rmse;  // split MSE
  rows.push_back(row);
  write_metric_csv(rc.out_dir + "/report.csv", rows);
  return rep;
}

std::vector<std::pair<std::string, double>> cmd_predict(const RunConfig& rc) {
  if (rc.predict_nodes.empty()) throw UsageError("predict: no node ids given (predict.nodes)");
  RestoredModel rm = restore_model(rc);
  const auto& g = rm.in.graph;
  std::vector<NodeId> ids;
  for (const auto& orig : rc.predict_nodes) {
    const auto v = g.node_by_orig_id(orig);
    if (!v) throw DataError("predict: unknown node id '" + orig + "'");
    const TypeId t = g.node_type(*v);
    const auto& lt = g.labeled_types();
    if (std::find(lt.begin(), lt.end(), t) == lt.end())
      throw DataError("predict: node '" + orig + "' has type '" + g.node_type_name(t) +
                      "', which carries no importance labels; scores are defined only for labeled types");
    ids.push_back(*v);
  }
  const auto fw = rm.model->forward(ids);
  const TargetTransform tf = rm.manifest["target_transform"].get<std::string>() == "log1p"
                                 ? TargetTransform::Log1p
                                 : TargetTransform::Identity;
  std::vector<std::pair<std::string, double>> out;
  ensure_dir(rc.out_dir);
  std::ofstream f(rc.out_dir + "/predictions.tsv");
  for (size_t i = 0; i < ids.size(); ++i) {
    const double score = invert_transform(fw.scores.data()[i], tf);
    out.emplace_back(rc.predict_nodes[i], score);
    f << rc.predict_nodes[i] << '\t' << format_double(score) << '\n';
  }
  return out;
}

void write_ablation_svg(const std::string& path, const std::vector<double>& fractions,
                        const std::vector<double>& mae, const std::vector<double>& rmse) {
  const double w = 640, h = 400, ml = 70, mr = 20, mt = 30, mb = 50;
  double lo = 0, hi = 1e-12;
  for (const double v : mae) hi = std::max(hi, v);
  for (const double v : rmse) hi = std::max(hi, v);
  hi *= 1.1;
  const auto sx = [&](double f) { return ml + f * (w - ml - mr); };
  const auto sy = [&](double v) { return h - mb - (v - lo) / (hi - lo) * (h - mt - mb); };
  const auto polyline = [&](const std::vector<double>& ys, const char* color) {
    std::string pts;
    for (size_t i = 0; i < fractions.size(); ++i)
      pts += format_double(sx(fractions[i])) + "," + format_double(sy(ys[i])) + " ";
    return "<polyline fill='none' stroke='" + std::string(color) + "' stroke-width='2' points='" + pts + "'/>\n";
  };
  std::ofstream f(path);
  if (!f) throw DataError("cannot write chart: " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
    << "<rect width='100%' height='100%' fill='white'/>\n"
    << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
    << "' stroke='black'/>\n"
    << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb << "' stroke='black'/>\n";
  for (size_t i = 0; i < fractions.size(); ++i) {
    f << "<text x='" << sx(fractions[i]) << "' y='" << h - mb + 20 << "' font-size='12' text-anchor='middle'>"
      << format_double(fractions[i]) << "</text>\n";
  }
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    f << "<text x='" << ml - 8 << "' y='" << sy(v) + 4 << "' font-size='12' text-anchor='end'>"
      << format_double(v) << "</text>\n";
  }
  f << polyline(mae, "#c0392b") << polyline(rmse, "#2980b9");
  f << "<text x='" << (w / 2) << "' y='" << h - 12 << "' font-size='13' text-anchor='middle'>"
    << "knowledge disable fraction</text>\n"
    << "<text x='" << w - mr - 10 << "' y='" << mt + 10 << "' font-size='13' text-anchor='end' fill='#c0392b'>MAE</text>\n"
    << "<text x='" << w - mr - 10 << "' y='" << mt + 28 << "' font-size='13' text-anchor='end' fill='#2980b9'>RMSE</text>\n"
    << "</svg>\n";
}

void cmd_ablate(const RunConfig& rc) {
  PipelineInputs in = prepare_inputs(rc);
  RunConfig base = rc;
  base.disable_fraction = 0.0;
  const KnowledgeBank bank = load_bank_or_fail(base, in);
  const FoldPlan plan = make_folds(in.graph, rc.seed);
  const int fold = rc.train_folds.empty() ? 0 : rc.train_folds[0];

  struct Row {
    double fraction, mae, rmse, nrmse, ndcg, spearman;
  };
  std::vector<Row> rows(rc.ablate_fractions.size());
  std::vector<std::function<void()>> jobs;
  for (size_t i = 0; i < rc.ablate_fractions.size(); ++i) {
    jobs.push_back([&, i] {
      const double fraction = rc.ablate_fractions[i];
      const KnowledgeBank local =
          fraction > 0 ? disable_knowledge(bank, fraction, rc.seed) : bank;
      ImportanceModel model(in.graph, local, rc.model);
      TrainResult tr = train_model(model, in.graph, plan.folds[static_cast<size_t>(fold)], fold, rc.train);
      const auto& m = tr.test_report.micro;
      rows[i] = Row{fraction, m.mae, m.rmse, m.nrmse, m.ndcg, m.spearman};
    });
  }
  run_bounded(std::move(jobs), thread_budget());

  ensure_dir(rc.out_dir);
  std::ofstream f(rc.out_dir + "/ablate.csv");
  f << "fraction,mae,rmse,nrmse,ndcg,spearman\n";
  std::vector<double> fr, mae, rmse;
  for (const auto& r : rows) {
    f << format_double(r.fraction) << ',' << format_double(r.mae) << ',' << format_double(r.rmse) << ','
      << format_double(r.nrmse) << ',' << format_double(r.ndcg) << ',' << format_double(r.spearman) << '\n';
    fr.push_back(r.fraction);
    mae.push_back(r.mae);
    rmse.push_back(r.rmse);
  }
  write_ablation_svg(rc.out_dir + "/ablate.svg", fr, mae, rmse);
}

}  // namespace hinimp
