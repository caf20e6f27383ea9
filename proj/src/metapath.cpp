#include "hinimp/metapath.hpp"

#include <algorithm>
#include <set>

#include "hinimp/errors.hpp"

namespace hinimp {

bool Metapath::is_symmetric() const {
  const size_t n = node_types.size();
  for (size_t i = 0; i < n; ++i)
    if (node_types[i] != node_types[n - 1 - i]) return false;
  const size_t h = edge_types.size();
  for (size_t i = 0; i < h; ++i)
    if (edge_types[i] != edge_types[h - 1 - i]) return false;
  return true;
}

std::string Metapath::to_string(const HeterogeneousGraph& g) const {
  std::string out = g.node_type_name(node_types[0]);
  for (size_t i = 0; i < edge_types.size(); ++i) {
    out += "[" + g.edge_type_name(edge_types[i]) + "]";
    out += g.node_type_name(node_types[i + 1]);
  }
  return out;
}

Metapath parse_metapath(const HeterogeneousGraph& g, const std::string& text) {
  Metapath p;
  size_t i = 0;
  const auto read_until = [&](char stop) {
    std::string tok;
    while (i < text.size() && text[i] != stop) tok += text[i++];
    return tok;
  };
  while (i < text.size()) {
    const std::string node = read_until('[');
    const auto nt = g.find_node_type(node);
    if (!nt) throw DataError("metapath '" + text + "': unknown node type '" + node + "'");
    p.node_types.push_back(*nt);
    if (i >= text.size()) break;
    ++i;  // '['
    const std::string edge = read_until(']');
    if (i >= text.size()) throw DataError("metapath '" + text + "': unbalanced brackets");
    ++i;  // ']'
    const auto et = g.find_edge_type(edge);
    if (!et) throw DataError("metapath '" + text + "': unknown edge type '" + edge + "'");
    p.edge_types.push_back(*et);
  }
  if (p.node_types.size() < 2 || p.edge_types.size() != p.node_types.size() - 1)
    throw DataError("metapath '" + text + "': needs >= 2 node slots with an edge type between each pair");
  return p;
}

bool schema_valid(const HeterogeneousGraph& g, const Metapath& p) {
  if (p.node_types.size() < 2 || p.edge_types.size() != p.node_types.size() - 1) return false;
  // collect the schema triples present in the data
  std::set<std::tuple<TypeId, TypeId, TypeId>> triples;
  for (const auto& e : g.edges()) triples.insert({g.node_type(e.src), e.etype, g.node_type(e.dst)});
  for (size_t h = 0; h < p.edge_types.size(); ++h)
    if (!triples.count({p.node_types[h], p.edge_types[h], p.node_types[h + 1]})) return false;
  return true;
}

std::vector<Metapath> enumerate_metapaths(const HeterogeneousGraph& g, int max_nodes) {
  std::vector<Metapath> out;
  if (max_nodes < 2) return out;

  std::set<std::tuple<TypeId, TypeId, TypeId>> triples;
  for (const auto& e : g.edges()) triples.insert({g.node_type(e.src), e.etype, g.node_type(e.dst)});

  // grow prefixes depth-first in lexicographic (type-id) order
  std::vector<Metapath> stack;
  for (TypeId t = 0; t < static_cast<TypeId>(g.node_type_count()); ++t)
    stack.push_back({{t}, {}});
  // DFS with explicit ordering: process the smallest prefix first
  std::vector<Metapath> acc;
  while (!stack.empty()) {
    const Metapath cur = stack.front();
    stack.erase(stack.begin());
    if (static_cast<int>(cur.node_types.size()) >= 2 && cur.is_symmetric()) acc.push_back(cur);
    if (static_cast<int>(cur.node_types.size()) >= max_nodes) continue;
    for (const auto& [a, r, b] : triples) {
      if (a != cur.node_types.back()) continue;
      Metapath next = cur;
      next.edge_types.push_back(r);
      next.node_types.push_back(b);
      stack.push_back(next);
    }
  }
  // lexicographic: by length, then node-type ids, then edge-type ids
  std::sort(acc.begin(), acc.end(), [](const Metapath& x, const Metapath& y) {
    if (x.node_types.size() != y.node_types.size()) return x.node_types.size() < y.node_types.size();
    if (x.node_types != y.node_types) return x.node_types < y.node_types;
    return x.edge_types < y.edge_types;
  });
  return acc;
}

int64_t CommutingMatrix::at(NodeId u, NodeId v) const {
  const auto it = std::lower_bound(row_nodes.begin(), row_nodes.end(), u);
  if (it == row_nodes.end() || *it != u) throw DataError("commuting matrix: not a row node: " + std::to_string(u));
  const size_t r = static_cast<size_t>(it - row_nodes.begin());
  for (int64_t i = offsets[r]; i < offsets[r + 1]; ++i)
    if (entries[static_cast<size_t>(i)].col == v) return entries[static_cast<size_t>(i)].count;
  return 0;
}

int64_t CommutingMatrix::total() const {
  int64_t t = 0;
  for (const auto& e : entries) {
    if (__builtin_add_overflow(t, e.count, &t)) throw NumericError("commuting matrix: total overflows int64");
  }
  return t;
}

CommutingMatrix commuting_matrix(const HeterogeneousGraph& g, const Metapath& p) {
  if (p.node_types.size() < 2 || p.edge_types.size() + 1 != p.node_types.size())
    throw DataError("commuting_matrix: malformed metapath");

  // per-hop typed adjacency: for hop h, out-neighbors v of u with
  // etype == R_h and phi(v) == A_{h+1}; phi(u) == A_h enforced by the frontier.
  CommutingMatrix m;
  m.row_nodes = g.nodes_of_type(p.source_type());
  m.offsets.assign(m.row_nodes.size() + 1, 0);

  std::vector<int64_t> scratch(static_cast<size_t>(g.node_count()), 0);
  std::vector<NodeId> touched;

  for (size_t r = 0; r < m.row_nodes.size(); ++r) {
    // frontier: sparse (node -> count) for the current hop
    std::vector<std::pair<NodeId, int64_t>> frontier{{m.row_nodes[r], 1}};
    for (size_t h = 0; h < p.edge_types.size() && !frontier.empty(); ++h) {
      const TypeId want_e = p.edge_types[h];
      const TypeId want_t = p.node_types[h + 1];
      touched.clear();
      for (const auto& [u, c] : frontier) {
        for (const auto& nb : g.typed_neighbors(u, Direction::Out)) {
          if (nb.etype != want_e || g.node_type(nb.node) != want_t) continue;
          auto& cell = scratch[static_cast<size_t>(nb.node)];
          if (cell == 0) touched.push_back(nb.node);
          if (__builtin_add_overflow(cell, c, &cell))
            throw NumericError("commuting_matrix: path-instance count overflows int64");
        }
      }
      std::sort(touched.begin(), touched.end());
      frontier.clear();
      for (const NodeId v : touched) {
        frontier.emplace_back(v, scratch[static_cast<size_t>(v)]);
        scratch[static_cast<size_t>(v)] = 0;
      }
    }
    for (const auto& [v, c] : frontier) m.entries.push_back({v, c});
    m.offsets[r + 1] = static_cast<int64_t>(m.entries.size());
  }
  return m;
}

int64_t InducedSubnetwork::member_index(NodeId v) const {
  const auto it = std::lower_bound(members.begin(), members.end(), v);
  if (it == members.end() || *it != v) return -1;
  return it - members.begin();
}

std::vector<std::vector<int64_t>> InducedSubnetwork::simple_adjacency() const {
  std::vector<std::vector<int64_t>> adj(members.size());
  for (const auto& e : weighted_edges) {
    const int64_t a = member_index(e.u), b = member_index(e.v);
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

InducedSubnetwork induce_subnetwork(const HeterogeneousGraph& g, const Metapath& p) {
  if (!schema_valid(g, p)) throw DataError("induce_subnetwork: metapath is not schema-valid");
  if (p.node_types.front() != p.node_types.back())
    throw DataError("induce_subnetwork: metapath must start and end on the same node type");
  const CommutingMatrix m = commuting_matrix(g, p);

  InducedSubnetwork s;
  s.metapath = p;
  s.node_type = p.source_type();

  std::set<NodeId> mem;
  for (size_t r = 0; r < m.row_nodes.size(); ++r) {
    for (int64_t i = m.offsets[r]; i < m.offsets[r + 1]; ++i) {
      mem.insert(m.row_nodes[r]);
      mem.insert(m.entries[static_cast<size_t>(i)].col);
    }
  }
  s.members.assign(mem.begin(), mem.end());
  s.commuting_diag.assign(s.members.size(), 0);

  for (size_t r = 0; r < m.row_nodes.size(); ++r) {
    const NodeId u = m.row_nodes[r];
    for (int64_t i = m.offsets[r]; i < m.offsets[r + 1]; ++i) {
      const auto& e = m.entries[static_cast<size_t>(i)];
      if (e.col == u) {
        s.commuting_diag[static_cast<size_t>(s.member_index(u))] = e.count;
      } else {
        s.weighted_edges.push_back({u, e.col, e.count});
      }
    }
  }
  return s;
}

}  // namespace hinimp
