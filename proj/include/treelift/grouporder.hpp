#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "treelift/perm_group.hpp"
#include "treelift/portrait.hpp"
#include "treelift/rng.hpp"
#include "treelift/schreier.hpp"
#include "treelift/words.hpp"

namespace treelift {

using BigInt = boost::multiprecision::cpp_int;

// Natural log of a positive big integer, relative error far below 1e-12.
double log_big(const BigInt& x);
std::size_t decimal_digits(const BigInt& x);

// Base and strong generating set of a permutation group on [0, degree).
//
// Construction runs random Schreier-Sims (sifting random subproducts until a
// run of them sift to the identity) and then a deterministic pass that sifts
// every Schreier generator at every level, so the chain is always complete.
//
// Base points are taken in `base_order` when given: the first point in that
// order moved by a generator that fixes the current base. For groups acting
// on a tree, listing vertices top-down keeps every basic orbit inside a set
// of siblings.
class StabChain {
 public:
  StabChain(std::size_t degree, std::span<const Perm> generators,
            std::span<const std::uint32_t> base_order = {}, std::uint64_t seed = 1);

  std::size_t degree() const { return degree_; }
  std::vector<std::uint32_t> base() const;
  std::vector<std::size_t> transversal_sizes() const;
  std::size_t strong_generator_count() const { return strong_.size(); }
  BigInt order() const;
  double log_order() const;

  bool contains(const Perm& g) const;

 private:
  struct Level {
    std::uint32_t point = 0;
    std::vector<std::uint32_t> orbit;      // orbit[0] == point
    std::vector<Perm> rep;                 // rep[k] maps point to orbit[k]
    std::vector<Perm> rep_inv;
    std::vector<std::size_t> gens;         // indices into strong_
    long find(std::uint32_t x) const;
  };

  // Sifts g through levels [from, end). Returns the first level where g fell
  // out (levels_.size() if none) and leaves the residue in g.
  std::size_t sift(Perm& g, std::size_t from) const;
  void rebuild_orbit(std::size_t i);
  std::uint32_t next_base_point(const Perm& g) const;
  // Adds a non-identity residue that fell out at `drop`, sitting below `from`.
  void add_strong(Perm g, std::size_t from, std::size_t drop);
  void random_phase(std::uint64_t seed);
  void verify();

  std::size_t degree_;
  std::vector<std::uint32_t> base_order_;
  std::vector<std::uint32_t> base_rank_;
  std::vector<Perm> strong_;
  std::vector<Level> levels_;
};

// Order of the group generated by permutations of [0, degree).
BigInt order(std::span<const Perm> perms);

// |W_n(H)| = |H|^((d^n - 1)/(d - 1)).
BigInt wreath_order(const PermGroup& group, int n);
double log_wreath_order(const PermGroup& group, int n);

// Portraits generating W_n(H): each generator of H placed at the leftmost
// vertex of each level.
std::vector<Portrait> wreath_generators(const PermGroup& group, int depth);

// Action of a tree automorphism on every vertex of levels 1..n, points
// numbered top-down (level-order index minus one).
Perm tree_action(std::span<const Perm> level_perms_1_to_n);
std::vector<std::uint32_t> tree_base_order(int arity, int n);

// Order of Psi_n of the group generated by the level actions of `gens`.
BigInt level_group_order(std::span<const Portrait> gens, int n, std::uint64_t seed = 1);

struct DensityRow {
  int level = 0;
  BigInt order;
  double log_order = 0;
  double log_wreath = 0;
  double gamma = 0;
};

struct DensitySequence {
  std::vector<DensityRow> rows;  // levels 1..maxN
  // min of gamma over the tail window [maxN - 3, maxN]
  double liminf_estimate = 0;
};

struct DensityOptions {
  std::size_t degree_budget = 1u << 14;
  std::uint64_t seed = 1;
};

// gamma_n of Psi_n(<w(a)>) for n = 1..max_level.
DensitySequence density_sequence(std::span<const FreeWord> words, std::span<const Portrait> gens,
                                 const PermGroup& group, int max_level, const DensityOptions& opt = {});

// Lower bound gamma_n(Delta) >= (d^(n-N) - 1)/(d^n - 1) * gamma_(n-N)(B) for
// B acting below a level-N vertex.
double subtree_density_bound(int arity, int n, int level_n, double gamma_sub);

// CSV: "seed,n,order_digits,gamma" after a version header.
void write_density_csv(std::ostream& os, std::uint64_t seed, const DensitySequence& seq, bool header);

}  // namespace treelift
