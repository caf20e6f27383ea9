#pragma once

#include <string>
#include <vector>

#include "hinimp/graph.hpp"
#include "hinimp/knowledge.hpp"
#include "hinimp/ot_head.hpp"
#include "hinimp/rng.hpp"
#include "hinimp/tensor.hpp"

namespace hinimp {

enum class Variant { Full, WoWd, WoLambda, WoNh, WoAtt };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

struct ModelConfig {
  int heads = 4;         // M
  int head_dim = 32;     // d
  int layers = 2;        // R (R-1 attention updates)
  int attn_hidden = 64;  // h, fusion attention bottleneck
  int mlp_hidden = 64;   // head width of the WoWd variant
  Variant variant = Variant::Full;
  uint64_t seed = 0;
};

// The trainable pipeline over a fixed (graph, bank) pair:
// knowledge vectorization -> two-level attentive fusion -> edge-typed
// multi-head attention -> reference-anchored scoring.
class ImportanceModel {
 public:
  ImportanceModel(const HeterogeneousGraph& g, const KnowledgeBank& bank, ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<std::pair<std::string, Tensor>>& parameters() const { return params_; }
  int64_t parameter_count() const;
  const ReferenceDistribution& reference() const { return ref_; }
  void set_reference(ReferenceDistribution ref);
  int64_t scoring_dim() const { return scoring_dim_; }

  struct Forward {
    std::vector<NodeId> scored;
    Tensor scores;                      // [scored.size()]
    std::vector<Tensor> intra_alpha;    // per metapath, [L+1] (undefined for empty subnets)
    std::vector<Tensor> inter_tau;      // per node type, [#metapaths of that type]
    std::vector<Tensor> attention_rows; // per (layer, head), [E] edge scores
    Tensor node_embeddings;             // e rows, [N, 128]
    Tensor hidden;                      // h^R rows (e rows for WoAtt)
    Tensor hstar;                       // [scored.size(), d_R]; undefined for WoWd
  };
  Forward forward(const std::vector<NodeId>& scored_nodes) const;

  // Single-value bank vectorization c = perceptron_l(value), on the tape.
  Tensor vectorize_centrality(double value, int l) const;

  // Edge order used by attention_rows (sorted by (dst, src, etype)) and the
  // per-destination segment offsets.
  const std::vector<TypedEdge>& edge_order() const { return edges_; }
  const std::vector<int64_t>& edge_segments() const { return seg_offsets_; }

 private:
  Tensor param(Rng& rng, const std::string& name, std::vector<int64_t> shape, double init_scale);
  Tensor param_const(const std::string& name, std::vector<int64_t> shape, double value);

  struct SubnetConstants {
    std::vector<Tensor> scalar_cols;  // L tensors [N_k, 1]
    std::vector<Tensor> mask_cols;    // L+1 tensors [N_k]
    Tensor sim;                       // [N_k, 128]
    std::vector<int64_t> pos_in_type; // member -> position within its type list
    TypeId node_type = 0;
    int64_t member_count = 0;
  };

  Tensor fuse_knowledge(std::vector<Tensor>* intra_alpha, std::vector<Tensor>* inter_tau) const;
  Tensor encode(const Tensor& x, std::vector<Tensor>* attention_rows) const;

  const HeterogeneousGraph& g_;
  ModelConfig cfg_;
  int64_t scoring_dim_ = 0;
  ReferenceDistribution ref_;

  std::vector<std::pair<std::string, Tensor>> params_;
  // perceptrons: per centrality l, [w_a(1,128), b_a(128), w_b(128,128), b_b(128)]
  std::vector<std::array<Tensor, 4>> perceptrons_;
  Tensor w1_, w1p_, b1_;  // Eq. 2
  Tensor w2_, w2p_, b2_;  // Eq. 4
  Tensor w_in_;
  std::vector<std::array<Tensor, 3>> head_qkv_;  // per head: w_qry, w_key, w_val (d,d)
  std::vector<Tensor> w_edge_;                   // per edge type (d,d)
  std::vector<Tensor> mu_;                       // per edge type, scalar
  Tensor w_out_;
  Tensor lambda_;               // [d_R, 1]
  Tensor wh1_, bh1_, wh2_, bh2_;  // WoWd head

  std::vector<SubnetConstants> subnet_const_;
  Tensor features_;  // [N, F]
  std::vector<std::vector<size_t>> subnets_of_type_;  // bank subnet indices per type

  // attention edge plan: edges sorted by (dst, src, etype)
  std::vector<TypedEdge> edges_;
  std::vector<int64_t> esrc_, edst_;
  std::vector<int64_t> seg_offsets_;                  // per dst node
  std::vector<std::vector<int64_t>> etype_positions_; // per edge type: indices into edges_
};

}  // namespace hinimp
