#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "hinimp/graph.hpp"

namespace testing_util {

// Scratch directory wiped per test case.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("hinimp_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& rel) const { return (path / rel).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

// authors a0,a1 write paper p0; a1,a2 write p1; papers p0,p1 in venue v0.
// Edges in both directions under one type name per relation.
inline hinimp::HeterogeneousGraph toy_dblp() {
  hinimp::HeterogeneousGraph::Builder b;
  const auto A = b.node_type_id("A");
  const auto P = b.node_type_id("P");
  const auto V = b.node_type_id("V");
  const auto ap = b.edge_type_id("ap");
  const auto pv = b.edge_type_id("pv");
  const auto a0 = b.add_node("a0", A), a1 = b.add_node("a1", A), a2 = b.add_node("a2", A);
  const auto p0 = b.add_node("p0", P), p1 = b.add_node("p1", P);
  const auto v0 = b.add_node("v0", V);
  const auto link = [&](hinimp::NodeId x, hinimp::NodeId y, hinimp::TypeId e) {
    b.add_edge(x, y, e);
    b.add_edge(y, x, e);
  };
  link(a0, p0, ap);
  link(a1, p0, ap);
  link(a1, p1, ap);
  link(a2, p1, ap);
  link(p0, v0, pv);
  link(p1, v0, pv);
  b.set_label(a0, 2.0);
  b.set_label(a1, 4.0);
  b.set_label(a2, 2.0);
  auto g = b.finish();
  g.synthesize_features(4, 11);
  return g;
}

}  // namespace testing_util
