#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace treelift {

// A permutation of {0..d-1}, stored as its image list.
using LocalPerm = std::vector<std::uint8_t>;

LocalPerm identity_perm(int degree);
LocalPerm invert(std::span<const std::uint8_t> p);
// (p then q): i -> q[p[i]]
LocalPerm then(std::span<const std::uint8_t> p, std::span<const std::uint8_t> q);
bool is_identity(std::span<const std::uint8_t> p);
std::string to_string(std::span<const std::uint8_t> p);

enum class GroupKind { kSymmetric, kCyclic, kExplicit };

// The transitive group H < Sym(d) labelling every tree vertex. All elements
// are enumerated at construction, so membership is a lookup.
class PermGroup {
 public:
  static PermGroup symmetric(int degree);
  static PermGroup cyclic(int degree);
  static PermGroup generated_by(int degree, std::vector<LocalPerm> generators);

  int degree() const { return degree_; }
  GroupKind kind() const { return kind_; }
  std::size_t order() const { return elements_.size(); }
  const std::vector<LocalPerm>& elements() const { return elements_; }
  const std::vector<LocalPerm>& generators() const { return generators_; }

  bool contains(std::span<const std::uint8_t> p) const;
  // Index of p in elements(); -1 when p is not in the group.
  long index_of(std::span<const std::uint8_t> p) const;

  std::string name() const;

 private:
  PermGroup(int degree, GroupKind kind, std::vector<LocalPerm> generators);

  static std::uint64_t encode(std::span<const std::uint8_t> p);

  int degree_;
  GroupKind kind_;
  std::vector<LocalPerm> generators_;
  std::vector<LocalPerm> elements_;
  // sorted (code, element index) pairs
  std::vector<std::pair<std::uint64_t, std::size_t>> lookup_;
};

}  // namespace treelift
