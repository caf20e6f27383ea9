#pragma once

#include <string>
#include <vector>

#include "hinimp/graph.hpp"

namespace hinimp {

// Type-level path template A1 -[R1]-> A2 ... -[RH]-> A_{H+1}.
struct Metapath {
  std::vector<TypeId> node_types;
  std::vector<TypeId> edge_types;

  int hops() const { return static_cast<int>(edge_types.size()); }
  TypeId source_type() const { return node_types.front(); }

  // Palindromic node types and mirrored edge types.
  bool is_symmetric() const;

  bool operator==(const Metapath&) const = default;

  std::string to_string(const HeterogeneousGraph& g) const;  // A[writes]P[writes]A
};

// Parses the config form `A[writes]P[writes]A`; names must exist in the schema.
Metapath parse_metapath(const HeterogeneousGraph& g, const std::string& text);

// Is every consecutive (A_i, R_i, A_{i+1}) present in the graph?
bool schema_valid(const HeterogeneousGraph& g, const Metapath& p);

// All schema-valid symmetric metapaths with 2..max_nodes node slots, in
// deterministic lexicographic order. max_nodes < 2 yields the empty list.
std::vector<Metapath> enumerate_metapaths(const HeterogeneousGraph& g, int max_nodes);

// Path-instance counts u -> v for the hops of p; rows over nodes of the source
// type, columns over nodes of the terminal type. Entries are exact.
struct CommutingMatrix {
  std::vector<NodeId> row_nodes;  // ascending, all nodes of the source type
  std::vector<int64_t> offsets;   // size row_nodes.size()+1
  struct Entry {
    NodeId col;
    int64_t count;
  };
  std::vector<Entry> entries;  // per row, sorted by col

  int64_t at(NodeId u, NodeId v) const;  // 0 when absent; u must be a row node
  int64_t total() const;                 // sum of all counts
};

CommutingMatrix commuting_matrix(const HeterogeneousGraph& g, const Metapath& p);

struct WeightedPair {
  NodeId u, v;
  int64_t count;
};

// Same-type graph whose edges connect nodes joined by >= 1 path instance.
// Self-instances live in commuting_diag, not in weighted_edges.
struct InducedSubnetwork {
  Metapath metapath;
  TypeId node_type = 0;                     // type of the members (source type)
  std::vector<NodeId> members;              // ascending; nodes with >= 1 incident instance
  std::vector<WeightedPair> weighted_edges; // directed pairs, count >= 1, u != v
  std::vector<int64_t> commuting_diag;      // aligned with members

  int64_t member_index(NodeId v) const;  // -1 when absent
  // Unweighted simple undirected adjacency over member indices, sorted.
  std::vector<std::vector<int64_t>> simple_adjacency() const;
};

InducedSubnetwork induce_subnetwork(const HeterogeneousGraph& g, const Metapath& p);

}  // namespace hinimp
