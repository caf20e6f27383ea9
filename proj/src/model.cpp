#include "hinimp/model.hpp"

#include <algorithm>
#include <cmath>

#include "hinimp/errors.hpp"
#include "hinimp/rng.hpp"

namespace hinimp {

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "wo_wd") return Variant::WoWd;
  if (name == "wo_lambda") return Variant::WoLambda;
  if (name == "wo_nh") return Variant::WoNh;
  if (name == "wo_att") return Variant::WoAtt;
  throw UsageError("unknown variant '" + name + "' (full|wo_wd|wo_lambda|wo_nh|wo_att)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::WoWd: return "wo_wd";
    case Variant::WoLambda: return "wo_lambda";
    case Variant::WoNh: return "wo_nh";
    case Variant::WoAtt: return "wo_att";
  }
  return "full";
}

Tensor ImportanceModel::param(Rng& rng, const std::string& name, std::vector<int64_t> shape, double init_scale) {
  int64_t numel = 1;
  for (const int64_t d : shape) numel *= d;
  std::vector<double> data(static_cast<size_t>(numel));
  for (auto& x : data) x = rng.uniform(-init_scale, init_scale);
  Tensor t = Tensor::from(std::move(shape), std::move(data), true);
  params_.emplace_back(name, t);
  return t;
}

Tensor ImportanceModel::param_const(const std::string& name, std::vector<int64_t> shape, double value) {
  int64_t numel = 1;
  for (const int64_t d : shape) numel *= d;
  Tensor t = Tensor::from(std::move(shape), std::vector<double>(static_cast<size_t>(numel), value), true);
  params_.emplace_back(name, t);
  return t;
}

ImportanceModel::ImportanceModel(const HeterogeneousGraph& g, const KnowledgeBank& bank, ModelConfig cfg)
    : g_(g), cfg_(cfg) {
  const int64_t dim_f = g.feature_dim();
  if (dim_f <= 0) throw DataError("model: graph has no features (load or synthesize them first)");
  const int64_t md = static_cast<int64_t>(cfg_.heads) * cfg_.head_dim;
  scoring_dim_ = cfg_.variant == Variant::WoAtt ? kKnowledgeDim : md;
  ref_ = ReferenceDistribution::create(scoring_dim_, cfg_.seed);

  Rng rng(mix_seed(cfg_.seed, "init"));
  const auto fan = [](int64_t in) { return 1.0 / std::sqrt(static_cast<double>(in)); };

  for (int l = 0; l < kCentralityCount; ++l) {
    const std::string p = "perc" + std::to_string(l) + ".";
    perceptrons_.push_back({param(rng, p + "w_a", {1, kKnowledgeDim}, fan(1)),
                            param_const(p + "b_a", {kKnowledgeDim}, 0.0),
                            param(rng, p + "w_b", {kKnowledgeDim, kKnowledgeDim}, fan(kKnowledgeDim)),
                            param_const(p + "b_b", {kKnowledgeDim}, 0.0)});
  }
  const int64_t h = cfg_.attn_hidden;
  w1p_ = param(rng, "fusion.w1_prime", {kKnowledgeDim, h}, fan(kKnowledgeDim));
  b1_ = param_const("fusion.b1", {h}, 0.0);
  w1_ = param(rng, "fusion.w1", {h, 1}, fan(h));
  w2p_ = param(rng, "fusion.w2_prime", {kKnowledgeDim, h}, fan(kKnowledgeDim));
  b2_ = param_const("fusion.b2", {h}, 0.0);
  w2_ = param(rng, "fusion.w2", {h, 1}, fan(h));

  if (cfg_.variant != Variant::WoAtt) {
    w_in_ = param(rng, "enc.w_in", {dim_f + kKnowledgeDim, md}, fan(dim_f + kKnowledgeDim));
    for (int m = 0; m < cfg_.heads; ++m) {
      const std::string p = "enc.head" + std::to_string(m) + ".";
      head_qkv_.push_back({param(rng, p + "w_qry", {cfg_.head_dim, cfg_.head_dim}, fan(cfg_.head_dim)),
                           param(rng, p + "w_key", {cfg_.head_dim, cfg_.head_dim}, fan(cfg_.head_dim)),
                           param(rng, p + "w_val", {cfg_.head_dim, cfg_.head_dim}, fan(cfg_.head_dim))});
    }
    for (int e = 0; e < g.edge_type_count(); ++e) {
      const std::string p = "enc.etype" + std::to_string(e) + ".";
      w_edge_.push_back(param(rng, p + "w_edge", {cfg_.head_dim, cfg_.head_dim}, fan(cfg_.head_dim)));
      mu_.push_back(param_const(p + "mu", {}, 1.0));
    }
    w_out_ = param(rng, "enc.w_out", {md, md}, fan(md));
  }

  if (cfg_.variant == Variant::WoWd) {
    wh1_ = param(rng, "head.w1", {scoring_dim_, cfg_.mlp_hidden}, fan(scoring_dim_));
    bh1_ = param_const("head.b1", {cfg_.mlp_hidden}, 0.0);
    wh2_ = param(rng, "head.w2", {cfg_.mlp_hidden, 1}, fan(cfg_.mlp_hidden));
    bh2_ = param_const("head.b2", {}, 0.0);
  } else if (cfg_.variant != Variant::WoLambda) {
    lambda_ = param(rng, "lambda", {scoring_dim_, 1}, fan(scoring_dim_));
  }

  // bank constants, pre-masked where constant
  subnets_of_type_.assign(static_cast<size_t>(g.node_type_count()), {});
  for (size_t k = 0; k < bank.subnets.size(); ++k) {
    const auto& sk = bank.subnets[k];
    SubnetConstants sc;
    sc.node_type = sk.node_type;
    sc.member_count = static_cast<int64_t>(sk.members.size());
    const int64_t n = sc.member_count;
    for (int l = 0; l < kCentralityCount; ++l) {
      std::vector<double> col(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) col[static_cast<size_t>(i)] = sk.scalars[static_cast<size_t>(i)][static_cast<size_t>(l)];
      sc.scalar_cols.push_back(Tensor::from({n, 1}, std::move(col)));
    }
    for (int l = 0; l < kKnowledgeSlots; ++l) {
      std::vector<double> mcol(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i)
        mcol[static_cast<size_t>(i)] = sk.mask[static_cast<size_t>(i) * kKnowledgeSlots + static_cast<size_t>(l)];
      sc.mask_cols.push_back(Tensor::from({n}, std::move(mcol)));
    }
    std::vector<double> sim(static_cast<size_t>(n) * kKnowledgeDim);
    for (int64_t i = 0; i < n; ++i) {
      const double m = sk.mask[static_cast<size_t>(i) * kKnowledgeSlots + kCentralityCount];
      for (int64_t d = 0; d < kKnowledgeDim; ++d)
        sim[static_cast<size_t>(i * kKnowledgeDim + d)] = m * sk.sim[static_cast<size_t>(i)][static_cast<size_t>(d)];
    }
    sc.sim = Tensor::from({n, kKnowledgeDim}, std::move(sim));
    sc.pos_in_type.resize(static_cast<size_t>(n));
    const auto& type_nodes = g.nodes_of_type(sk.node_type);
    for (int64_t i = 0; i < n; ++i) {
      const auto it = std::lower_bound(type_nodes.begin(), type_nodes.end(), sk.members[static_cast<size_t>(i)]);
      sc.pos_in_type[static_cast<size_t>(i)] = it - type_nodes.begin();
    }
    subnets_of_type_[static_cast<size_t>(sk.node_type)].push_back(k);
    subnet_const_.push_back(std::move(sc));
  }

  const int64_t n_nodes = g.node_count();
  std::vector<double> feat(static_cast<size_t>(n_nodes * dim_f));
  for (NodeId v = 0; v < n_nodes; ++v)
    std::copy_n(g.feature(v).data(), dim_f, feat.data() + v * dim_f);
  features_ = Tensor::from({n_nodes, dim_f}, std::move(feat));

  // attention edge plan
  edges_ = g.edges();
  std::sort(edges_.begin(), edges_.end(), [](const TypedEdge& a, const TypedEdge& b) {
    if (a.dst != b.dst) return a.dst < b.dst;
    if (a.src != b.src) return a.src < b.src;
    return a.etype < b.etype;
  });
  seg_offsets_.assign(static_cast<size_t>(n_nodes) + 1, 0);
  etype_positions_.assign(static_cast<size_t>(g.edge_type_count()), {});
  for (size_t i = 0; i < edges_.size(); ++i) {
    esrc_.push_back(edges_[i].src);
    edst_.push_back(edges_[i].dst);
    seg_offsets_[static_cast<size_t>(edges_[i].dst) + 1]++;
    etype_positions_[static_cast<size_t>(edges_[i].etype)].push_back(static_cast<int64_t>(i));
  }
  for (size_t v = 0; v < static_cast<size_t>(n_nodes); ++v) seg_offsets_[v + 1] += seg_offsets_[v];
}

int64_t ImportanceModel::parameter_count() const {
  int64_t t = 0;
  for (const auto& [name, p] : params_) t += p.numel();
  return t;
}

void ImportanceModel::set_reference(ReferenceDistribution ref) {
  if (ref.dim() != scoring_dim_)
    throw DataError("reference dimension " + std::to_string(ref.dim()) + " does not match scoring dim " +
                    std::to_string(scoring_dim_));
  ref_ = std::move(ref);
}

Tensor ImportanceModel::vectorize_centrality(double value, int l) const {
  if (l < 0 || l >= kCentralityCount) throw DataError("vectorize_centrality: bad measure index");
  const auto& pc = perceptrons_[static_cast<size_t>(l)];
  const Tensor x = Tensor::from({1, 1}, {value});
  const Tensor t = tanh_op(add(matmul(x, pc[0]), repeat_row(pc[1], 1)));
  const Tensor c = add(matmul(t, pc[2]), repeat_row(pc[3], 1));
  return reshape(c, {kKnowledgeDim});
}

Tensor ImportanceModel::fuse_knowledge(std::vector<Tensor>* intra_alpha, std::vector<Tensor>* inter_tau) const {
  const int64_t n_nodes = g_.node_count();
  // intra-metapath fusion: one coefficient per (subnet, slot), shared by members
  std::vector<Tensor> fused;  // per subnet: [N_k, 128]
  std::vector<Tensor> tau_scores(subnet_const_.size());
  for (size_t k = 0; k < subnet_const_.size(); ++k) {
    const auto& sc = subnet_const_[k];
    if (sc.member_count == 0) {
      fused.emplace_back();
      tau_scores[k] = Tensor::scalar(0.0);  // empty sub-network: defined as 0
      if (intra_alpha) intra_alpha->emplace_back();
      continue;
    }
    std::vector<Tensor> slots;
    for (int l = 0; l < kCentralityCount; ++l) {
      const auto& pc = perceptrons_[static_cast<size_t>(l)];
      const Tensor t = tanh_op(add(matmul(sc.scalar_cols[static_cast<size_t>(l)], pc[0]),
                                   repeat_row(pc[1], sc.member_count)));
      const Tensor c = add(matmul(t, pc[2]), repeat_row(pc[3], sc.member_count));
      slots.push_back(scale_rows(c, sc.mask_cols[static_cast<size_t>(l)]));
    }
    slots.push_back(sc.sim);  // similarity slot, mask folded in

    std::vector<Tensor> alpha_scores;
    for (const auto& c : slots) {
      const Tensor t = tanh_op(add(matmul(c, w1p_), repeat_row(b1_, sc.member_count)));
      alpha_scores.push_back(mean(matmul(t, w1_)));
    }
    const Tensor alpha_hat = softmax_last(stack_scalars(alpha_scores));
    if (intra_alpha) intra_alpha->push_back(alpha_hat);

    Tensor e_k;
    for (size_t l = 0; l < slots.size(); ++l) {
      const Tensor term = mul_scalar(slots[l], gather(alpha_hat, {static_cast<int64_t>(l)}));
      e_k = e_k.defined() ? add(e_k, term) : term;
    }
    fused.push_back(e_k);

    const Tensor t2 = tanh_op(add(matmul(e_k, w2p_), repeat_row(b2_, sc.member_count)));
    tau_scores[k] = mean(matmul(t2, w2_));
  }

  // inter-metapath fusion per node type
  Tensor e_all;
  for (TypeId j = 0; j < static_cast<TypeId>(g_.node_type_count()); ++j) {
    const auto& ks = subnets_of_type_[static_cast<size_t>(j)];
    const auto& type_nodes = g_.nodes_of_type(j);
    if (ks.empty() || type_nodes.empty()) {
      if (inter_tau) inter_tau->emplace_back();
      continue;  // zero-vector fallback for types with no metapaths
    }
    std::vector<Tensor> scores;
    for (const size_t k : ks) scores.push_back(tau_scores[k]);
    const Tensor tau_hat = softmax_last(stack_scalars(scores));
    if (inter_tau) inter_tau->push_back(tau_hat);

    Tensor e_type;
    for (size_t i = 0; i < ks.size(); ++i) {
      const auto& sc = subnet_const_[ks[i]];
      if (sc.member_count == 0 || !fused[ks[i]].defined()) continue;
      const Tensor spread = scatter_add_rows(fused[ks[i]], sc.pos_in_type,
                                             static_cast<int64_t>(type_nodes.size()));
      const Tensor term = mul_scalar(spread, gather(tau_hat, {static_cast<int64_t>(i)}));
      e_type = e_type.defined() ? add(e_type, term) : term;
    }
    if (!e_type.defined()) continue;
    std::vector<int64_t> global(type_nodes.begin(), type_nodes.end());
    const Tensor spread = scatter_add_rows(e_type, global, n_nodes);
    e_all = e_all.defined() ? add(e_all, spread) : spread;
  }
  if (!e_all.defined()) e_all = Tensor::zeros({n_nodes, kKnowledgeDim});
  return e_all;
}

Tensor ImportanceModel::encode(const Tensor& x, std::vector<Tensor>* attention_rows) const {
  const int64_t n = g_.node_count();
  const int64_t d = cfg_.head_dim;
  const int64_t e_total = static_cast<int64_t>(edges_.size());
  Tensor hidden = matmul(x, w_in_);  // h^(1)

  for (int r = 0; r + 1 < cfg_.layers; ++r) {
    std::vector<Tensor> head_out;
    for (int m = 0; m < cfg_.heads; ++m) {
      const Tensor hm = slice_cols(hidden, static_cast<int64_t>(m) * d, d);
      const Tensor q = matmul(hm, head_qkv_[static_cast<size_t>(m)][0]);
      const Tensor kk = matmul(hm, head_qkv_[static_cast<size_t>(m)][1]);
      const Tensor v = matmul(hm, head_qkv_[static_cast<size_t>(m)][2]);

      Tensor logits_col;  // [E, 1]
      for (size_t et = 0; et < etype_positions_.size(); ++et) {
        const auto& pos = etype_positions_[et];
        if (pos.empty()) continue;
        std::vector<int64_t> src(pos.size()), dst(pos.size());
        for (size_t i = 0; i < pos.size(); ++i) {
          src[i] = esrc_[static_cast<size_t>(pos[i])];
          dst[i] = edst_[static_cast<size_t>(pos[i])];
        }
        const Tensor ktil = matmul(kk, w_edge_[et]);
        const Tensor prod = mul(gather_rows(q, std::move(dst)), gather_rows(ktil, std::move(src)));
        const Tensor l_type = mul_scalar(sum_last(prod), mu_[et]);
        const Tensor spread = scatter_add_rows(reshape(l_type, {static_cast<int64_t>(pos.size()), 1}), pos, e_total);
        logits_col = logits_col.defined() ? add(logits_col, spread) : spread;
      }
      if (!logits_col.defined()) {
        head_out.push_back(Tensor::zeros({n, d}));
        if (attention_rows) attention_rows->push_back(Tensor::zeros({0}));
        continue;
      }
      const Tensor logits = scalar_mul(reshape(logits_col, {e_total}), 1.0 / std::sqrt(static_cast<double>(d)));
      const Tensor s = segment_softmax(logits, seg_offsets_);
      if (attention_rows) attention_rows->push_back(s);
      const Tensor weighted = scale_rows(gather_rows(v, esrc_), s);
      head_out.push_back(scatter_add_rows(weighted, edst_, n));
    }
    const Tensor cat = concat_last(head_out);
    hidden = add(hidden, matmul(cat, w_out_));
  }
  return hidden;
}

ImportanceModel::Forward ImportanceModel::forward(const std::vector<NodeId>& scored_nodes) const {
  Forward fw;
  fw.scored = scored_nodes;
  for (const NodeId v : scored_nodes)
    if (v < 0 || v >= g_.node_count()) throw DataError("forward: scored node out of range: " + std::to_string(v));

  fw.node_embeddings = fuse_knowledge(&fw.intra_alpha, &fw.inter_tau);

  if (cfg_.variant == Variant::WoAtt) {
    fw.hidden = fw.node_embeddings;
  } else {
    const Tensor x = concat_last({features_, fw.node_embeddings});
    fw.hidden = encode(x, &fw.attention_rows);
  }

  const Tensor h_s = gather_rows(fw.hidden, std::vector<int64_t>(scored_nodes.begin(), scored_nodes.end()));
  const int64_t b = static_cast<int64_t>(scored_nodes.size());
  if (cfg_.variant == Variant::WoWd) {
    const Tensor t = tanh_op(add(matmul(h_s, wh1_), repeat_row(bh1_, b)));
    fw.scores = add(reshape(matmul(t, wh2_), {b}), bh2_);
  } else {
    fw.hstar = wasserstein_embed_rows(h_s, ref_);
    if (cfg_.variant == Variant::WoLambda) {
      fw.scores = sum_last(fw.hstar);  // lambda fixed to all-ones
    } else {
      fw.scores = reshape(matmul(fw.hstar, lambda_), {b});
    }
  }
  return fw;
}

}  // namespace hinimp
