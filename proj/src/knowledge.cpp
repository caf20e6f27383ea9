#include "hinimp/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace hinimp {

std::vector<std::vector<double>> pathsim(const InducedSubnetwork& s) {
  const size_t n = s.members.size();
  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    if (s.commuting_diag[i] > 0) sim[i][i] = 1.0;
  for (const auto& e : s.weighted_edges) {
    const size_t a = static_cast<size_t>(s.member_index(e.u));
    const size_t b = static_cast<size_t>(s.member_index(e.v));
    const double denom = static_cast<double>(s.commuting_diag[a] + s.commuting_diag[b]);
    sim[a][b] = denom > 0 ? 2.0 * static_cast<double>(e.count) / denom : 0.0;
  }
  return sim;
}

WalkGraph pathsim_top_peers(const InducedSubnetwork& s, int top_k) {
  const size_t n = s.members.size();
  std::vector<std::vector<std::pair<double, int64_t>>> cand(n);
  for (const auto& e : s.weighted_edges) {
    const int64_t a = s.member_index(e.u);
    const int64_t b = s.member_index(e.v);
    const double denom =
        static_cast<double>(s.commuting_diag[static_cast<size_t>(a)] + s.commuting_diag[static_cast<size_t>(b)]);
    const double sim = denom > 0 ? 2.0 * static_cast<double>(e.count) / denom : 0.0;
    if (sim > 0) cand[static_cast<size_t>(a)].push_back({sim, b});
  }
  WalkGraph wg;
  wg.adj.resize(n);
  std::vector<std::vector<std::pair<int64_t, double>>> keep(n);
  for (size_t u = 0; u < n; ++u) {
    auto& c = cand[u];
    // highest similarity first; ties by member index for determinism
    std::sort(c.begin(), c.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    if (static_cast<int>(c.size()) > top_k) c.resize(static_cast<size_t>(top_k));
    for (const auto& [simv, v] : c) {
      keep[u].push_back({v, simv});
      keep[static_cast<size_t>(v)].push_back({static_cast<int64_t>(u), simv});  // symmetrized union
    }
  }
  for (size_t u = 0; u < n; ++u) {
    auto& k = keep[u];
    std::sort(k.begin(), k.end());
    for (size_t i = 0; i < k.size(); ++i) {
      if (i > 0 && k[i].first == k[i - 1].first) continue;
      wg.add_arc(static_cast<int64_t>(u), k[i].first, k[i].second);
    }
  }
  wg.sort_arcs();
  return wg;
}

namespace {

double clamped_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dotp = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dotp += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::max(0.0, dotp / std::sqrt(na * nb));
}

}  // namespace

WalkGraph attribute_similarity_graph(const InducedSubnetwork& s, const HeterogeneousGraph& g) {
  if (!g.has_features()) throw DataError("attribute_similarity_graph: graph has no features");
  WalkGraph wg;
  wg.adj.resize(s.members.size());
  for (const auto& e : s.weighted_edges) {
    const int64_t a = s.member_index(e.u), b = s.member_index(e.v);
    const double w = clamped_cosine(g.feature(e.u), g.feature(e.v));
    wg.add_arc(a, b, w);
  }
  wg.sort_arcs();
  return wg;
}

std::vector<double> similarity_embedding(const std::vector<double>& f_att, const std::vector<double>& f_top) {
  if (f_att.size() != f_top.size()) throw DataError("similarity_embedding: dimension mismatch");
  std::vector<double> out(f_att.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = f_att[i] + f_top[i];
  return out;
}

int64_t KnowledgeBank::total_slots() const {
  int64_t t = 0;
  for (const auto& s : subnets) t += static_cast<int64_t>(s.members.size()) * kKnowledgeSlots;
  return t;
}

KnowledgeBank build_knowledge_bank(const HeterogeneousGraph& g, const std::vector<Metapath>& metapaths,
                                   const KnowledgeParams& params) {
  KnowledgeBank bank;
  bank.seed = params.seed;
  for (size_t k = 0; k < metapaths.size(); ++k) {
    const InducedSubnetwork sub = induce_subnetwork(g, metapaths[k]);
    SubnetKnowledge sk;
    sk.metapath = metapaths[k];
    sk.node_type = sub.node_type;
    sk.members = sub.members;
    const size_t n = sk.members.size();
    sk.mask.assign(n * kKnowledgeSlots, 1);
    if (n == 0) {
      bank.subnets.push_back(std::move(sk));
      continue;
    }

    const CentralityResult cent = compute_centralities(sub);
    sk.scalars = cent.normalized;

    Node2VecParams n2v = params.node2vec;
    n2v.dim = kKnowledgeDim;
    n2v.seed = mix_seed(params.seed, "n2v-att", static_cast<uint64_t>(k));
    const auto f_att = random_walk_embed(attribute_similarity_graph(sub, g), n2v);
    n2v.seed = mix_seed(params.seed, "n2v-top", static_cast<uint64_t>(k));
    const auto f_top = random_walk_embed(pathsim_top_peers(sub, params.pathsim_top_k), n2v);

    sk.sim.resize(n);
    for (size_t i = 0; i < n; ++i) sk.sim[i] = similarity_embedding(f_att[i], f_top[i]);
    bank.subnets.push_back(std::move(sk));
  }
  return bank;
}

KnowledgeBank disable_knowledge(const KnowledgeBank& bank, double fraction, uint64_t seed) {
  if (fraction < 0 || fraction > 1) throw DataError("disable_knowledge: fraction must be in [0,1]");
  KnowledgeBank out = bank;
  const int64_t total = out.total_slots();
  const int64_t zeroed = static_cast<int64_t>(std::llround(fraction * static_cast<double>(total)));
  if (zeroed == 0) return out;

  struct Slot {
    size_t subnet, member, l;
  };
  std::vector<Slot> slots;
  slots.reserve(static_cast<size_t>(total));
  for (size_t s = 0; s < out.subnets.size(); ++s)
    for (size_t i = 0; i < out.subnets[s].members.size(); ++i)
      for (size_t l = 0; l < kKnowledgeSlots; ++l) slots.push_back({s, i, l});
  Rng rng(mix_seed(seed, "disable"));
  rng.shuffle(slots);
  for (int64_t z = 0; z < zeroed; ++z) {
    const Slot& sl = slots[static_cast<size_t>(z)];
    out.subnets[sl.subnet].mask[sl.member * kKnowledgeSlots + sl.l] = 0;
  }
  return out;
}

namespace {

constexpr char kBankMagic[8] = {'H', 'I', 'N', 'B', 'A', 'N', 'K', '1'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_pod(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(f);
}

void write_string(std::ofstream& f, const std::string& s) {
  write_pod<uint32_t>(f, static_cast<uint32_t>(s.size()));
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

bool read_string(std::ifstream& f, std::string& s) {
  uint32_t n = 0;
  if (!read_pod(f, n)) return false;
  s.resize(n);
  f.read(s.data(), n);
  return static_cast<bool>(f);
}

}  // namespace

void save_knowledge_bank(const KnowledgeBank& bank, const std::string& bank_path,
                         const std::string& manifest_path, const std::string& key) {
  std::ofstream f(bank_path, std::ios::binary);
  if (!f) throw DataError("cannot write knowledge bank: " + bank_path);
  f.write(kBankMagic, sizeof(kBankMagic));
  write_pod<uint64_t>(f, bank.seed);
  write_pod<uint32_t>(f, static_cast<uint32_t>(bank.subnets.size()));
  for (const auto& s : bank.subnets) {
    write_pod<int32_t>(f, s.node_type);
    write_pod<uint32_t>(f, static_cast<uint32_t>(s.metapath.node_types.size()));
    for (const TypeId t : s.metapath.node_types) write_pod<int32_t>(f, t);
    for (const TypeId t : s.metapath.edge_types) write_pod<int32_t>(f, t);
    write_pod<uint64_t>(f, static_cast<uint64_t>(s.members.size()));
    for (const NodeId v : s.members) write_pod<int64_t>(f, v);
    for (const auto& row : s.scalars)
      for (const double x : row) write_pod<double>(f, x);
    for (const auto& row : s.sim) {
      for (const double x : row) write_pod<double>(f, x);
    }
    f.write(reinterpret_cast<const char*>(s.mask.data()), static_cast<std::streamsize>(s.mask.size()));
  }
  if (!f) throw DataError("failed writing knowledge bank: " + bank_path);

  nlohmann::json manifest;
  manifest["key"] = key;
  manifest["seed"] = bank.seed;
  manifest["subnets"] = bank.subnets.size();
  std::ofstream mf(manifest_path);
  if (!mf) throw DataError("cannot write bank manifest: " + manifest_path);
  mf << manifest.dump(2) << "\n";
}

bool load_knowledge_bank(KnowledgeBank& bank, const std::string& bank_path, const std::string& manifest_path,
                         const std::string& key) {
  {
    std::ifstream mf(manifest_path);
    if (!mf) return false;
    nlohmann::json manifest;
    try {
      mf >> manifest;
    } catch (const nlohmann::json::exception&) {
      return false;
    }
    if (!manifest.contains("key") || manifest["key"].get<std::string>() != key) return false;
  }
  std::ifstream f(bank_path, std::ios::binary);
  if (!f) return false;
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kBankMagic, sizeof(magic)) != 0) return false;

  KnowledgeBank out;
  uint32_t n_subnets = 0;
  if (!read_pod(f, out.seed) || !read_pod(f, n_subnets)) return false;
  for (uint32_t si = 0; si < n_subnets; ++si) {
    SubnetKnowledge s;
    if (!read_pod(f, s.node_type)) return false;
    uint32_t n_types = 0;
    if (!read_pod(f, n_types)) return false;
    s.metapath.node_types.resize(n_types);
    s.metapath.edge_types.resize(n_types > 0 ? n_types - 1 : 0);
    for (auto& t : s.metapath.node_types)
      if (!read_pod(f, t)) return false;
    for (auto& t : s.metapath.edge_types)
      if (!read_pod(f, t)) return false;
    uint64_t n_members = 0;
    if (!read_pod(f, n_members)) return false;
    s.members.resize(n_members);
    for (auto& v : s.members)
      if (!read_pod(f, v)) return false;
    s.scalars.resize(n_members);
    for (auto& row : s.scalars)
      for (auto& x : row)
        if (!read_pod(f, x)) return false;
    s.sim.assign(n_members, std::vector<double>(kKnowledgeDim));
    for (auto& row : s.sim)
      for (auto& x : row)
        if (!read_pod(f, x)) return false;
    s.mask.resize(n_members * kKnowledgeSlots);
    if (!s.mask.empty()) {
      f.read(reinterpret_cast<char*>(s.mask.data()), static_cast<std::streamsize>(s.mask.size()));
      if (!f) return false;
    }
    out.subnets.push_back(std::move(s));
  }
  bank = std::move(out);
  return true;
}

}  // namespace hinimp
