#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "treelift/portrait.hpp"
#include "treelift/words.hpp"

namespace treelift {

using Perm = std::vector<std::uint32_t>;

Perm invert(const Perm& p);

// Directed edge (origin, generator, sign) of a Schreier graph. Its target is
// origin^(generator^sign); its inverse is (target, generator, -sign).
struct DirectedEdge {
  std::uint32_t origin = 0;
  std::uint32_t gen = 0;  // 0-based
  int sign = 1;

  bool operator==(const DirectedEdge&) const = default;
};

// Geometric edges {e, ebar} are identified by the positively oriented member:
// id = origin(+) * generator_count + gen. Parallel edges and loops therefore
// keep distinct ids.
using EdgeId = std::uint64_t;

// Schreier graph G(Gamma, S, L(n)) of a level action. Fixed points are kept as
// loops, so every vertex has out-degree 2|S|.
class LevelGraph {
 public:
  LevelGraph(int level, int arity, std::vector<Perm> generators);

  int level() const { return level_; }
  int arity() const { return arity_; }
  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t generator_count() const { return forward_.size(); }
  std::size_t degree() const { return 2 * forward_.size(); }
  std::size_t edge_count() const { return vertex_count_ * forward_.size(); }

  const Perm& forward(std::size_t gen) const { return forward_[gen]; }
  const Perm& backward(std::size_t gen) const { return backward_[gen]; }
  const std::vector<Perm>& generators() const { return forward_; }

  std::uint32_t target(DirectedEdge e) const {
    return (e.sign > 0 ? forward_ : backward_)[e.gen][e.origin];
  }
  DirectedEdge reverse(DirectedEdge e) const { return {target(e), e.gen, -e.sign}; }
  EdgeId geometric(DirectedEdge e) const {
    const std::uint32_t o = e.sign > 0 ? e.origin : target(e);
    return static_cast<EdgeId>(o) * generator_count() + e.gen;
  }
  DirectedEdge positive(EdgeId id) const {
    return {static_cast<std::uint32_t>(id / generator_count()),
            static_cast<std::uint32_t>(id % generator_count()), 1};
  }
  // Endpoints of a geometric edge, smaller first.
  std::pair<std::uint32_t, std::uint32_t> endpoints(EdgeId id) const;

  // The 2|S| directed edges leaving v: (v,0,+), (v,0,-), (v,1,+), ...
  DirectedEdge out_edge(std::uint32_t v, std::size_t k) const {
    return {v, static_cast<std::uint32_t>(k / 2), (k % 2 == 0) ? 1 : -1};
  }

 private:
  int level_;
  int arity_;
  std::size_t vertex_count_;
  std::vector<Perm> forward_;
  std::vector<Perm> backward_;
};

// X_n for generators given as portraits.
LevelGraph build_schreier(std::span<const Portrait> gens, int n);
// Y_n: the Schreier graph of the substituted words, built from X_n.
LevelGraph build_schreier(std::span<const FreeWord> words, const LevelGraph& x);

struct Components {
  std::vector<std::uint32_t> of;                    // component id per vertex
  std::vector<std::vector<std::uint32_t>> members;  // ids ordered by smallest member
  std::size_t count() const { return members.size(); }
};

Components components(const LevelGraph& g);

// Parent map L(n+1) -> L(n); validated to send edges to equally labelled edges.
std::vector<std::uint32_t> covering_map(const LevelGraph& upper, const LevelGraph& lower);

// Edge-to-path map iota_n: Y_n -> X_n.
class ImmersionMap {
 public:
  ImmersionMap(LevelGraph x, LevelGraph y, std::vector<FreeWord> words);

  const LevelGraph& x() const { return x_; }
  const LevelGraph& y() const { return y_; }
  const std::vector<FreeWord>& words() const { return words_; }
  std::size_t max_word_length() const;

  // Directed X path traced by a directed Y edge.
  std::vector<DirectedEdge> path(DirectedEdge y_edge) const;
  // Geometric X edges along the positive orientation of a geometric Y edge.
  std::span<const EdgeId> edges_of(EdgeId y_edge) const;
  // zeta(e): geometric Y edges whose path traverses geometric X edge e.
  std::span<const EdgeId> preimage(EdgeId x_edge) const;

 private:
  LevelGraph x_;
  LevelGraph y_;
  std::vector<FreeWord> words_;
  std::vector<std::size_t> word_offset_;  // per generator: prefix sum of lengths
  std::size_t stride_ = 0;                // sum of word lengths
  std::vector<EdgeId> path_edges_;        // per Y vertex, stride_ entries
  std::vector<std::uint32_t> zeta_start_;
  std::vector<EdgeId> zeta_items_;
};

ImmersionMap immersion(const LevelGraph& x, const LevelGraph& y, std::span<const FreeWord> words);

inline constexpr std::size_t kInfiniteGirth = std::numeric_limits<std::size_t>::max();

// Length of the shortest non-backtracking cycle; loops count 1, parallel
// edges 2, forests kInfiniteGirth. With `cap` set, any value >= cap may be
// reported as cap.
std::size_t girth(const LevelGraph& g, std::size_t cap = kInfiniteGirth);

// zeta(E) as a sorted set of geometric Y edges.
std::vector<EdgeId> zeta(const ImmersionMap& imm, std::span<const EdgeId> x_edges);

// CSV: header line, then "level,origin,target,generator,sign" rows for every
// directed edge. Generators are 1-based in the file.
void write_edge_csv(std::ostream& os, const LevelGraph& g);

}  // namespace treelift
