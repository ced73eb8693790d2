#include "treelift/tree.hpp"

#include <cmath>
#include <string>

namespace treelift {

std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

TreeShape::TreeShape(int d, int n) : arity(d), max_depth(n) {
  if (d < 2) throw Error("tree arity must be at least 2");
  if (n < 0) throw Error("tree depth must be non-negative");
  // 64-bit level codes
  if (static_cast<double>(n) * std::log2(static_cast<double>(d)) > 62.0)
    throw Error("tree depth " + std::to_string(n) + " overflows vertex codes");
}

std::uint64_t TreeShape::level_size(int n) const { return ipow(arity, n); }

std::uint64_t TreeShape::vertices_above(int n) const {
  return (level_size(n) - 1) / static_cast<std::uint64_t>(arity - 1);
}

VertexId parent(VertexId v, int arity) {
  if (v.level == 0) throw Error("the root has no parent");
  return {v.level - 1, v.code / static_cast<std::uint64_t>(arity)};
}

VertexId child(VertexId v, int digit, int arity) {
  return {v.level + 1, v.code * static_cast<std::uint64_t>(arity) + static_cast<std::uint64_t>(digit)};
}

std::vector<VertexId> children(VertexId v, const TreeShape& shape) {
  if (v.level >= shape.max_depth) throw Error("children: vertex is beyond truncation depth");
  std::vector<VertexId> out;
  out.reserve(static_cast<std::size_t>(shape.arity));
  for (int i = 0; i < shape.arity; ++i) out.push_back(child(v, i, shape.arity));
  return out;
}

int digit_at(VertexId v, int i, int arity) {
  return static_cast<int>((v.code / ipow(arity, v.level - 1 - i)) % static_cast<std::uint64_t>(arity));
}

bool is_descendant(VertexId w, VertexId v, int arity) {
  if (w.level < v.level) return false;
  return w.code / ipow(arity, w.level - v.level) == v.code;
}

VertexId tau(VertexId v, VertexId w, int arity) {
  if (!is_descendant(w, v, arity)) throw Error("tau: vertex is not a descendant");
  const int depth = w.level - v.level;
  return {depth, w.code % ipow(arity, depth)};
}

VertexId concat(VertexId v, VertexId u, int arity) {
  return {v.level + u.level, v.code * ipow(arity, u.level) + u.code};
}

}  // namespace treelift
