#pragma once

#include <cstdint>
#include <vector>

#include "treelift/error.hpp"

namespace treelift {

// Truncated rooted d-ary tree. Level n holds d^n vertices.
struct TreeShape {
  int arity = 2;
  int max_depth = 0;

  TreeShape() = default;
  TreeShape(int d, int n);

  // d^n for 0 <= n <= max_depth (and beyond, as long as it fits 64 bits).
  std::uint64_t level_size(int n) const;
  // Number of vertices strictly above level n: (d^n - 1) / (d - 1).
  std::uint64_t vertices_above(int n) const;
  std::uint64_t internal_count() const { return vertices_above(max_depth); }

  bool operator==(const TreeShape&) const = default;
};

// A vertex is a base-d string of length `level`, packed into `code` with the
// first tree step as the most significant digit.
struct VertexId {
  int level = 0;
  std::uint64_t code = 0;

  bool operator==(const VertexId&) const = default;
  auto operator<=>(const VertexId&) const = default;
};

inline constexpr VertexId kRoot{0, 0};

std::uint64_t ipow(std::uint64_t base, int exp);

VertexId parent(VertexId v, int arity);
VertexId child(VertexId v, int digit, int arity);
std::vector<VertexId> children(VertexId v, const TreeShape& shape);

// Digit taken at step `i` (0 = the step out of the root).
int digit_at(VertexId v, int i, int arity);

bool is_descendant(VertexId w, VertexId v, int arity);

// Identification of the subtree T_v with T: drop the first v.level digits of w.
VertexId tau(VertexId v, VertexId w, int arity);

// Inverse of tau: the vertex v.u.
VertexId concat(VertexId v, VertexId u, int arity);

// Position of v in the level-order enumeration of the whole tree.
inline std::uint64_t level_order_index(VertexId v, const TreeShape& shape) {
  return shape.vertices_above(v.level) + v.code;
}

}  // namespace treelift
