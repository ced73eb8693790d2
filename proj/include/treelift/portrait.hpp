#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treelift/perm_group.hpp"
#include "treelift/rng.hpp"
#include "treelift/tree.hpp"

namespace treelift {

// A tree automorphism truncated to depth N, given by one local permutation
// per internal vertex (levels 0..N-1). The label at v says how the element
// maps the children of v onto the children of the image of v:
//   (v.i)^g = v^g . label(v)[i].
// Products are right actions: compose(g, h) is "g, then h".
class Portrait {
 public:
  Portrait() = default;
  explicit Portrait(TreeShape shape);  // identity

  static Portrait identity(TreeShape shape) { return Portrait(shape); }

  const TreeShape& shape() const { return shape_; }
  int arity() const { return shape_.arity; }
  int depth() const { return shape_.max_depth; }

  std::span<const std::uint8_t> label(VertexId v) const;
  std::span<const std::uint8_t> label_at(std::uint64_t level_order) const {
    return {labels_.data() + level_order * arity_u(), arity_u()};
  }
  std::span<std::uint8_t> mutable_label_at(std::uint64_t level_order) {
    return {labels_.data() + level_order * arity_u(), arity_u()};
  }
  void set_label(VertexId v, std::span<const std::uint8_t> perm);

  // Raw level-order storage, arity bytes per internal vertex.
  const std::vector<std::uint8_t>& raw() const { return labels_; }
  std::span<std::uint8_t> mutable_raw() { return labels_; }

  bool is_identity() const;
  bool operator==(const Portrait&) const = default;

  // Every label lies in H.
  bool is_in(const PermGroup& group) const;

 private:
  friend Portrait extend_haar(const Portrait&, const PermGroup&, int, Rng&);
  std::size_t arity_u() const { return static_cast<std::size_t>(shape_.arity); }

  TreeShape shape_;
  std::vector<std::uint8_t> labels_;
};

// Image of x under g.
VertexId apply(const Portrait& g, VertexId x);

// Images of every level-n vertex, indexed by code.
std::vector<std::uint32_t> level_action(const Portrait& g, int n);

Portrait compose(const Portrait& g, const Portrait& h);
Portrait inverse(const Portrait& g);

// Restriction to the first n levels (the homomorphism Psi_n).
Portrait psi(const Portrait& g, int n);

// The automorphism g induces from the subtree below v onto the subtree below
// v^g, read through the identifications of both subtrees with T. Depth is
// N - level(v).
Portrait local_cocycle(const Portrait& g, VertexId v);

// Independent uniform labels from H at every internal vertex.
Portrait sample_haar(const PermGroup& group, TreeShape shape, Rng& rng);

// Append independent uniform labels for levels depth()..new_depth-1, keeping
// the existing labels.
Portrait extend_haar(const Portrait& g, const PermGroup& group, int new_depth, Rng& rng);

// Invariant ultrametric. `displacement` is the largest n with Psi_n(a^-1 b)
// trivial; when a and b agree to full depth `identical` is set and the
// distance is reported as 0.
struct Ultrametric {
  int displacement = 0;
  bool identical = false;
  int arity = 2;

  double distance() const;
};

Ultrametric distance(const Portrait& a, const Portrait& b);

// Plain-text format:
//   portrait <arity> <depth>
//   <d images of label at level-order vertex 0>
//   ...
//   end
void write_portrait(std::ostream& os, const Portrait& g);
Portrait read_portrait(std::istream& is);
std::string serialize(const Portrait& g);
Portrait parse_portrait(const std::string& text);

}  // namespace treelift
