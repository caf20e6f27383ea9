#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hinimp/centrality.hpp"
#include "hinimp/metapath.hpp"
#include "hinimp/node2vec.hpp"

namespace hinimp {

inline constexpr int kKnowledgeDim = 128;  // fixed embedding width of the bank
inline constexpr int kKnowledgeSlots = kCentralityCount + 1;  // L centralities + similarity

// PathSim over members: sim(u,v) = 2 M_uv / (M_uu + M_vv), using edge counts
// off-diagonal and commuting_diag on the diagonal. Zero denominator -> 0.
std::vector<std::vector<double>> pathsim(const InducedSubnetwork& s);

// Top-k most similar peers per member from the sparse PathSim entries, as a
// symmetric weighted walk graph over member indices.
WalkGraph pathsim_top_peers(const InducedSubnetwork& s, int top_k);

// Sub-network edges weighted by max(0, cosine) of endpoint features, over
// member indices. Zero-norm features give cosine 0.
WalkGraph attribute_similarity_graph(const InducedSubnetwork& s, const HeterogeneousGraph& g);

// Elementwise sum of the attribute- and topology-aware walk embeddings.
std::vector<double> similarity_embedding(const std::vector<double>& f_att, const std::vector<double>& f_top);

struct KnowledgeParams {
  Node2VecParams node2vec;  // dim forced to kKnowledgeDim
  int pathsim_top_k = 10;
  uint64_t seed = 0;
};

// Per-metapath slice of the bank: fixed inputs of the trainable pipeline.
struct SubnetKnowledge {
  Metapath metapath;
  TypeId node_type = 0;
  std::vector<NodeId> members;                       // ascending
  std::vector<std::array<double, kCentralityCount>> scalars;  // min-max normalized
  std::vector<std::vector<double>> sim;              // members x kKnowledgeDim
  std::vector<uint8_t> mask;                         // members x kKnowledgeSlots, 1 = active
};

struct KnowledgeBank {
  std::vector<SubnetKnowledge> subnets;
  uint64_t seed = 0;

  int slots_per_node() const { return kKnowledgeSlots; }
  int64_t total_slots() const;
};

KnowledgeBank build_knowledge_bank(const HeterogeneousGraph& g, const std::vector<Metapath>& metapaths,
                                   const KnowledgeParams& params);

// Zeroes a uniformly random `fraction` of (node, metapath, slot) embedding
// slots; exactly round(fraction * total) slots, deterministic per seed.
KnowledgeBank disable_knowledge(const KnowledgeBank& bank, double fraction, uint64_t seed);

// Binary cache with a JSON manifest holding `key` (seeds/parameters digest).
void save_knowledge_bank(const KnowledgeBank& bank, const std::string& bank_path,
                         const std::string& manifest_path, const std::string& key);
// Returns false when missing or the manifest key mismatches.
bool load_knowledge_bank(KnowledgeBank& bank, const std::string& bank_path, const std::string& manifest_path,
                         const std::string& key);

}  // namespace hinimp
