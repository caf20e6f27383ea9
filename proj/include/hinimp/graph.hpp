#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hinimp {

using NodeId = int64_t;
using TypeId = int32_t;

enum class Direction { In, Out, Both };

struct TypedEdge {
  NodeId src = 0;
  NodeId dst = 0;
  TypeId etype = 0;
};

struct TypedNeighbor {
  NodeId node = 0;
  TypeId etype = 0;
  bool operator==(const TypedNeighbor&) const = default;
};

// Directed heterogeneous graph with dense node ids. Immutable once built.
class HeterogeneousGraph {
 public:
  int64_t node_count() const { return static_cast<int64_t>(node_type_.size()); }
  int64_t edge_count() const { return static_cast<int64_t>(edges_.size()); }
  int node_type_count() const { return static_cast<int>(node_type_names_.size()); }
  int edge_type_count() const { return static_cast<int>(edge_type_names_.size()); }

  TypeId node_type(NodeId v) const { return node_type_[static_cast<size_t>(v)]; }
  const std::string& node_type_name(TypeId t) const { return node_type_names_[static_cast<size_t>(t)]; }
  const std::string& edge_type_name(TypeId t) const { return edge_type_names_[static_cast<size_t>(t)]; }
  const std::vector<std::string>& node_type_names() const { return node_type_names_; }
  const std::vector<std::string>& edge_type_names() const { return edge_type_names_; }
  std::optional<TypeId> find_node_type(const std::string& name) const;
  std::optional<TypeId> find_edge_type(const std::string& name) const;

  const std::vector<TypedEdge>& edges() const { return edges_; }
  const std::string& orig_id(NodeId v) const { return orig_ids_[static_cast<size_t>(v)]; }
  std::optional<NodeId> node_by_orig_id(const std::string& id) const;

  // Nodes of one type, ascending.
  const std::vector<NodeId>& nodes_of_type(TypeId t) const { return by_type_[static_cast<size_t>(t)]; }

  // Deterministic order: ascending (neighbor, etype); Both = In ++ Out.
  std::vector<TypedNeighbor> typed_neighbors(NodeId v, Direction dir) const;

  bool has_features() const { return feature_dim_ > 0; }
  int64_t feature_dim() const { return feature_dim_; }
  const std::vector<double>& feature(NodeId v) const { return features_[static_cast<size_t>(v)]; }

  bool has_label(NodeId v) const { return has_label_[static_cast<size_t>(v)] != 0; }
  double label(NodeId v) const { return labels_[static_cast<size_t>(v)]; }
  const std::vector<TypeId>& labeled_types() const { return labeled_types_; }
  std::vector<NodeId> labeled_nodes() const;
  std::vector<NodeId> labeled_nodes_of_type(TypeId t) const;

  // Invariant check; violations are data, not failures.
  std::vector<std::string> validate() const;

  // Uniform random features in [-0.5, 0.5]^dim for graphs loaded without a
  // features file (text features are out of scope).
  void synthesize_features(int64_t dim, uint64_t seed);

  // A view with one node type and one edge type, same topology and labels.
  HeterogeneousGraph homogenized() const;

  class Builder;

 private:
  std::vector<TypeId> node_type_;
  std::vector<std::string> node_type_names_;
  std::vector<std::string> edge_type_names_;
  std::vector<std::string> orig_ids_;
  std::map<std::string, NodeId> orig_to_id_;
  std::vector<TypedEdge> edges_;
  std::vector<std::vector<NodeId>> by_type_;

  // CSR adjacency, entries sorted by (neighbor, etype)
  std::vector<int64_t> out_off_, in_off_;
  std::vector<TypedNeighbor> out_adj_, in_adj_;

  std::vector<std::vector<double>> features_;
  int64_t feature_dim_ = 0;
  std::vector<double> labels_;
  std::vector<uint8_t> has_label_;
  std::vector<TypeId> labeled_types_;
};

class HeterogeneousGraph::Builder {
 public:
  TypeId node_type_id(const std::string& name);   // registers in first-seen order
  TypeId edge_type_id(const std::string& name);
  NodeId add_node(const std::string& orig_id, TypeId type);  // throws DataError on duplicates
  void add_edge(NodeId src, NodeId dst, TypeId etype);
  void set_label(NodeId v, double y);
  void set_feature(NodeId v, std::vector<double> f);
  int64_t node_count() const { return static_cast<int64_t>(g_.node_type_.size()); }

  template <typename F>
  void for_each_edge(F&& f) const {
    for (const auto& e : g_.edges_) f(e.src, e.dst, e.etype);
  }

  // Validates bounds/feature dims and freezes adjacency. Does not enforce
  // |A|+|R| > 2 (that is validate()'s job and load_graph's).
  HeterogeneousGraph finish();

 private:
  HeterogeneousGraph g_;
  bool finished_ = false;
};

// TSV ingestion per the documented formats. Throws DataError with line numbers
// on malformed input; throws on any validate() violation.
HeterogeneousGraph load_graph(const std::string& nodes_path, const std::string& edges_path,
                              const std::string& features_path = "");

void save_graph(const HeterogeneousGraph& g, const std::string& nodes_path,
                const std::string& edges_path, const std::string& features_path = "");

enum class Attachment { Uniform, Preferential };

struct SyntheticEdgeRule {
  std::string etype;
  std::string src_type;
  std::string dst_type;
  int per_dst = 1;  // edges attached per destination node
  Attachment attachment = Attachment::Uniform;
};

enum class LabelTransform { Linear, Sqrt, Log1p };

struct SyntheticSpec {
  std::vector<std::pair<std::string, int64_t>> node_counts;  // (type name, count)
  std::vector<SyntheticEdgeRule> edge_rules;
  bool bidirectional = true;  // also emit reversed edges under the same type name
  int64_t feature_dim = 8;
  std::vector<std::string> labeled_types;
  LabelTransform label_transform = LabelTransform::Linear;
  double label_scale = 1.0;
  double label_offset = 0.0;
  double label_noise = 0.0;
  bool noise_relative = false;  // scale noise by the std of the noiseless labels
  uint64_t seed = 0;
};

// Deterministic per seed. Labels = transform(total degree)*scale + offset + gaussian noise,
// assigned only to nodes of the labeled types.
HeterogeneousGraph generate_synthetic(const SyntheticSpec& spec);

}  // namespace hinimp
