#include "hinimp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace hinimp {

std::optional<TypeId> HeterogeneousGraph::find_node_type(const std::string& name) const {
  for (size_t i = 0; i < node_type_names_.size(); ++i)
    if (node_type_names_[i] == name) return static_cast<TypeId>(i);
  return std::nullopt;
}

std::optional<TypeId> HeterogeneousGraph::find_edge_type(const std::string& name) const {
  for (size_t i = 0; i < edge_type_names_.size(); ++i)
    if (edge_type_names_[i] == name) return static_cast<TypeId>(i);
  return std::nullopt;
}

std::optional<NodeId> HeterogeneousGraph::node_by_orig_id(const std::string& id) const {
  auto it = orig_to_id_.find(id);
  if (it == orig_to_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<TypedNeighbor> HeterogeneousGraph::typed_neighbors(NodeId v, Direction dir) const {
  if (v < 0 || v >= node_count()) throw DataError("typed_neighbors: node id out of range: " + std::to_string(v));
  std::vector<TypedNeighbor> out;
  const auto append = [&](const std::vector<int64_t>& off, const std::vector<TypedNeighbor>& adj) {
    for (int64_t i = off[static_cast<size_t>(v)]; i < off[static_cast<size_t>(v) + 1]; ++i)
      out.push_back(adj[static_cast<size_t>(i)]);
  };
  if (dir == Direction::In || dir == Direction::Both) append(in_off_, in_adj_);
  if (dir == Direction::Out || dir == Direction::Both) append(out_off_, out_adj_);
  return out;
}

std::vector<NodeId> HeterogeneousGraph::labeled_nodes() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < node_count(); ++v)
    if (has_label_[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

std::vector<NodeId> HeterogeneousGraph::labeled_nodes_of_type(TypeId t) const {
  std::vector<NodeId> out;
  for (NodeId v : by_type_[static_cast<size_t>(t)])
    if (has_label_[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

std::vector<std::string> HeterogeneousGraph::validate() const {
  std::vector<std::string> violations;
  if (node_type_count() + edge_type_count() <= 2)
    violations.push_back("|A|+|R|>2 fails: " + std::to_string(node_type_count()) + " node types + " +
                         std::to_string(edge_type_count()) + " edge types");
  for (size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (e.src < 0 || e.src >= node_count() || e.dst < 0 || e.dst >= node_count())
      violations.push_back("edge " + std::to_string(i) + " references node id out of range");
  }
  for (NodeId v = 0; v < node_count(); ++v) {
    if (!has_label_[static_cast<size_t>(v)]) continue;
    const TypeId t = node_type_[static_cast<size_t>(v)];
    if (std::find(labeled_types_.begin(), labeled_types_.end(), t) == labeled_types_.end())
      violations.push_back("labeled node " + orig_ids_[static_cast<size_t>(v)] + " has type outside labeled_types");
  }
  if (feature_dim_ > 0) {
    for (NodeId v = 0; v < node_count(); ++v)
      if (static_cast<int64_t>(features_[static_cast<size_t>(v)].size()) != feature_dim_) {
        violations.push_back("feature dimension mismatch at node " + orig_ids_[static_cast<size_t>(v)]);
        break;
      }
  }
  return violations;
}

void HeterogeneousGraph::synthesize_features(int64_t dim, uint64_t seed) {
  Rng rng(mix_seed(seed, "features"));
  feature_dim_ = dim;
  features_.assign(static_cast<size_t>(node_count()), {});
  for (auto& f : features_) {
    f.resize(static_cast<size_t>(dim));
    for (auto& x : f) x = rng.uniform(-0.5, 0.5);
  }
}

HeterogeneousGraph HeterogeneousGraph::homogenized() const {
  Builder b;
  const TypeId t = b.node_type_id("node");
  const TypeId e = b.edge_type_id("link");
  for (NodeId v = 0; v < node_count(); ++v) b.add_node(orig_ids_[static_cast<size_t>(v)], t);
  for (const auto& ed : edges_) b.add_edge(ed.src, ed.dst, e);
  for (NodeId v = 0; v < node_count(); ++v) {
    if (has_label_[static_cast<size_t>(v)]) b.set_label(v, labels_[static_cast<size_t>(v)]);
    if (feature_dim_ > 0) b.set_feature(v, features_[static_cast<size_t>(v)]);
  }
  return b.finish();
}

TypeId HeterogeneousGraph::Builder::node_type_id(const std::string& name) {
  if (auto t = g_.find_node_type(name)) return *t;
  g_.node_type_names_.push_back(name);
  g_.by_type_.emplace_back();
  return static_cast<TypeId>(g_.node_type_names_.size() - 1);
}

TypeId HeterogeneousGraph::Builder::edge_type_id(const std::string& name) {
  if (auto t = g_.find_edge_type(name)) return *t;
  g_.edge_type_names_.push_back(name);
  return static_cast<TypeId>(g_.edge_type_names_.size() - 1);
}

NodeId HeterogeneousGraph::Builder::add_node(const std::string& orig_id, TypeId type) {
  if (g_.orig_to_id_.count(orig_id)) throw DataError("duplicate node id: " + orig_id);
  const NodeId v = static_cast<NodeId>(g_.node_type_.size());
  g_.node_type_.push_back(type);
  g_.orig_ids_.push_back(orig_id);
  g_.orig_to_id_.emplace(orig_id, v);
  g_.by_type_[static_cast<size_t>(type)].push_back(v);
  g_.labels_.push_back(0.0);
  g_.has_label_.push_back(0);
  g_.features_.emplace_back();
  return v;
}

void HeterogeneousGraph::Builder::add_edge(NodeId src, NodeId dst, TypeId etype) {
  if (src < 0 || src >= node_count() || dst < 0 || dst >= node_count())
    throw DataError("edge endpoint out of range: " + std::to_string(src) + " -> " + std::to_string(dst));
  g_.edges_.push_back({src, dst, etype});
}

void HeterogeneousGraph::Builder::set_label(NodeId v, double y) {
  g_.labels_[static_cast<size_t>(v)] = y;
  g_.has_label_[static_cast<size_t>(v)] = 1;
}

void HeterogeneousGraph::Builder::set_feature(NodeId v, std::vector<double> f) {
  if (g_.feature_dim_ == 0)
    g_.feature_dim_ = static_cast<int64_t>(f.size());
  else if (g_.feature_dim_ != static_cast<int64_t>(f.size()))
    throw DataError("feature dimension mismatch at node " + g_.orig_ids_[static_cast<size_t>(v)] + ": got " +
                    std::to_string(f.size()) + ", expected " + std::to_string(g_.feature_dim_));
  g_.features_[static_cast<size_t>(v)] = std::move(f);
}

HeterogeneousGraph HeterogeneousGraph::Builder::finish() {
  if (finished_) throw DataError("builder already finished");
  finished_ = true;

  std::set<TypeId> lt;
  for (NodeId v = 0; v < node_count(); ++v)
    if (g_.has_label_[static_cast<size_t>(v)]) lt.insert(g_.node_type_[static_cast<size_t>(v)]);
  g_.labeled_types_.assign(lt.begin(), lt.end());

  const size_t n = static_cast<size_t>(node_count());
  std::vector<std::vector<TypedNeighbor>> out(n), in(n);
  for (const auto& e : g_.edges_) {
    out[static_cast<size_t>(e.src)].push_back({e.dst, e.etype});
    in[static_cast<size_t>(e.dst)].push_back({e.src, e.etype});
  }
  const auto flatten = [n](std::vector<std::vector<TypedNeighbor>>& adj, std::vector<int64_t>& off,
                           std::vector<TypedNeighbor>& flat) {
    off.assign(n + 1, 0);
    for (size_t v = 0; v < n; ++v) {
      auto& a = adj[v];
      std::sort(a.begin(), a.end(), [](const TypedNeighbor& x, const TypedNeighbor& y) {
        return x.node != y.node ? x.node < y.node : x.etype < y.etype;
      });
      off[v + 1] = off[v] + static_cast<int64_t>(a.size());
      flat.insert(flat.end(), a.begin(), a.end());
    }
  };
  flatten(out, g_.out_off_, g_.out_adj_);
  flatten(in, g_.in_off_, g_.in_adj_);
  return std::move(g_);
}

namespace {

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    size_t idx = 0;
    const double v = std::stod(s, &idx);
    if (idx != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed number '" + s + "' " + where);
  }
}

}  // namespace

HeterogeneousGraph load_graph(const std::string& nodes_path, const std::string& edges_path,
                              const std::string& features_path) {
  HeterogeneousGraph::Builder b;

  std::ifstream nf(nodes_path);
  if (!nf) throw DataError("cannot open nodes file: " + nodes_path);
  std::string line;
  int64_t lineno = 0;
  std::map<std::string, NodeId> ids;  // orig id -> dense index
  while (std::getline(nf, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto f = split_tabs(line);
    if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty())
      throw DataError("malformed node line " + std::to_string(lineno) + " in " + nodes_path);
    const NodeId v = b.add_node(f[0], b.node_type_id(f[1]));
    ids.emplace(f[0], v);
    if (f.size() == 3 && !f[2].empty())
      b.set_label(v, parse_double(f[2], "at line " + std::to_string(lineno) + " of " + nodes_path));
  }

  std::ifstream ef(edges_path);
  if (!ef) throw DataError("cannot open edges file: " + edges_path);
  lineno = 0;
  while (std::getline(ef, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto f = split_tabs(line);
    if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty())
      throw DataError("malformed edge line " + std::to_string(lineno) + " in " + edges_path);
    const auto si = ids.find(f[0]);
    const auto di = ids.find(f[1]);
    if (si == ids.end() || di == ids.end())
      throw DataError("dangling edge endpoint at line " + std::to_string(lineno) + " in " + edges_path + ": " +
                      (si == ids.end() ? f[0] : f[1]));
    b.add_edge(si->second, di->second, b.edge_type_id(f[2]));
  }

  if (!features_path.empty()) {
    std::ifstream ff(features_path);
    if (!ff) throw DataError("cannot open features file: " + features_path);
    lineno = 0;
    while (std::getline(ff, line)) {
      ++lineno;
      if (is_blank_or_comment(line)) continue;
      const auto f = split_tabs(line);
      if (f.size() != 2 || f[0].empty())
        throw DataError("malformed feature line " + std::to_string(lineno) + " in " + features_path);
      const auto it = ids.find(f[0]);
      if (it == ids.end())
        throw DataError("feature line " + std::to_string(lineno) + " references unknown node " + f[0]);
      std::vector<double> vec;
      std::stringstream ss(f[1]);
      std::string tok;
      while (std::getline(ss, tok, ','))
        vec.push_back(parse_double(tok, "at line " + std::to_string(lineno) + " of " + features_path));
      b.set_feature(it->second, std::move(vec));
    }
  }

  HeterogeneousGraph g = b.finish();
  const auto violations = g.validate();
  if (!violations.empty()) {
    std::string msg = "graph validation failed:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw DataError(msg);
  }
  return g;
}

void save_graph(const HeterogeneousGraph& g, const std::string& nodes_path, const std::string& edges_path,
                const std::string& features_path) {
  std::ofstream nf(nodes_path);
  if (!nf) throw DataError("cannot write nodes file: " + nodes_path);
  nf.precision(17);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    nf << g.orig_id(v) << '\t' << g.node_type_name(g.node_type(v)) << '\t';
    if (g.has_label(v)) nf << g.label(v);
    nf << '\n';
  }

  std::ofstream ef(edges_path);
  if (!ef) throw DataError("cannot write edges file: " + edges_path);
  for (const auto& e : g.edges())
    ef << g.orig_id(e.src) << '\t' << g.orig_id(e.dst) << '\t' << g.edge_type_name(e.etype) << '\n';

  if (!features_path.empty() && g.has_features()) {
    std::ofstream ff(features_path);
    if (!ff) throw DataError("cannot write features file: " + features_path);
    ff.precision(17);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      ff << g.orig_id(v) << '\t';
      const auto& f = g.feature(v);
      for (size_t i = 0; i < f.size(); ++i) ff << (i ? "," : "") << f[i];
      ff << '\n';
    }
  }
}

HeterogeneousGraph generate_synthetic(const SyntheticSpec& spec) {
  if (spec.node_counts.size() < 2 || spec.edge_rules.empty())
    throw DataError("synthetic spec needs at least 2 node types and 1 edge rule");
  if (spec.label_noise < 0) throw DataError("synthetic spec: noise scale must be >= 0");

  HeterogeneousGraph::Builder b;
  std::map<std::string, TypeId> type_of;
  std::map<std::string, std::vector<NodeId>> nodes_of;
  for (const auto& [name, count] : spec.node_counts) {
    const TypeId t = b.node_type_id(name);
    type_of[name] = t;
    auto& list = nodes_of[name];
    for (int64_t i = 0; i < count; ++i) list.push_back(b.add_node(name + std::to_string(i), t));
  }

  std::vector<int64_t> degree(static_cast<size_t>(b.node_count()), 0);
  for (const auto& rule : spec.edge_rules) {
    if (!type_of.count(rule.src_type) || !type_of.count(rule.dst_type))
      throw DataError("synthetic edge rule references unknown type: " + rule.src_type + "->" + rule.dst_type);
    const auto& srcs = nodes_of[rule.src_type];
    const auto& dsts = nodes_of[rule.dst_type];
    if (srcs.empty() || static_cast<size_t>(rule.per_dst) > srcs.size())
      throw DataError("infeasible synthetic edge rule '" + rule.etype + "': " + std::to_string(rule.per_dst) +
                      " edges per node from " + std::to_string(srcs.size()) + " candidates");
    const TypeId et = b.edge_type_id(rule.etype);
    Rng rng(mix_seed(spec.seed, "edges", static_cast<uint64_t>(et)));
    for (const NodeId dst : dsts) {
      std::vector<NodeId> chosen;
      int64_t guard = 0;
      while (static_cast<int>(chosen.size()) < rule.per_dst) {
        if (++guard > (rule.per_dst + 1) * 1000)
          throw DataError("infeasible synthetic edge rule '" + rule.etype + "': cannot pick distinct sources");
        NodeId pick = -1;
        if (rule.attachment == Attachment::Uniform) {
          pick = srcs[rng.below(srcs.size())];
        } else {
          // weight = 1 + current total degree
          int64_t total = 0;
          for (const NodeId s : srcs) total += 1 + degree[static_cast<size_t>(s)];
          int64_t r = static_cast<int64_t>(rng.below(static_cast<uint64_t>(total)));
          for (const NodeId s : srcs) {
            r -= 1 + degree[static_cast<size_t>(s)];
            if (r < 0) { pick = s; break; }
          }
        }
        if (pick == dst) continue;  // no self loops from rules on a shared type
        if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end()) chosen.push_back(pick);
      }
      for (const NodeId src : chosen) {
        b.add_edge(src, dst, et);
        degree[static_cast<size_t>(src)]++;
        degree[static_cast<size_t>(dst)]++;
        if (spec.bidirectional) b.add_edge(dst, src, et);
      }
    }
  }

  // label degree counts incident edges in the final graph (in + out)
  std::vector<NodeId> labeled;
  for (const auto& tname : spec.labeled_types) {
    if (!type_of.count(tname)) throw DataError("synthetic labeled type unknown: " + tname);
    for (const NodeId v : nodes_of[tname]) labeled.push_back(v);
  }
  std::sort(labeled.begin(), labeled.end());
  std::vector<int64_t> total_degree(static_cast<size_t>(b.node_count()), 0);
  b.for_each_edge([&](NodeId src, NodeId dst, TypeId) {
    total_degree[static_cast<size_t>(src)]++;
    total_degree[static_cast<size_t>(dst)]++;
  });
  std::vector<double> base(labeled.size());
  for (size_t i = 0; i < labeled.size(); ++i) {
    const double d = static_cast<double>(total_degree[static_cast<size_t>(labeled[i])]);
    double t = d;
    if (spec.label_transform == LabelTransform::Sqrt) t = std::sqrt(d);
    else if (spec.label_transform == LabelTransform::Log1p) t = std::log1p(d);
    base[i] = spec.label_scale * t + spec.label_offset;
  }
  double noise = spec.label_noise;
  if (spec.noise_relative && !base.empty()) {
    double m = 0, s2 = 0;
    for (double x : base) m += x;
    m /= static_cast<double>(base.size());
    for (double x : base) s2 += (x - m) * (x - m);
    noise = spec.label_noise * std::sqrt(s2 / static_cast<double>(base.size()));
  }
  Rng lrng(mix_seed(spec.seed, "labels"));
  for (size_t i = 0; i < labeled.size(); ++i)
    b.set_label(labeled[i], base[i] + (noise > 0 ? lrng.normal(0.0, noise) : 0.0));

  HeterogeneousGraph g = b.finish();
  if (spec.feature_dim > 0) g.synthesize_features(spec.feature_dim, spec.seed);
  return g;
}

}  // namespace hinimp
