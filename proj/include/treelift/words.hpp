#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treelift/portrait.hpp"

namespace treelift {

// x_gen^exp with gen in [1, rank] and exp = +1 or -1.
struct Letter {
  int gen = 1;
  int exp = 1;

  Letter inverse() const { return {gen, -exp}; }
  bool operator==(const Letter&) const = default;
};

// A freely reduced word in F_m.
class FreeWord {
 public:
  FreeWord() = default;
  // Freely reduces `raw`.
  FreeWord(int rank, std::vector<Letter> raw);

  static FreeWord generator(int rank, int gen) { return FreeWord(rank, {{gen, 1}}); }

  int rank() const { return rank_; }
  std::size_t length() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  const std::vector<Letter>& letters() const { return letters_; }

  FreeWord inverse() const;
  FreeWord power(int k) const;
  bool is_cyclically_reduced() const;

  friend FreeWord operator*(const FreeWord& a, const FreeWord& b);
  bool operator==(const FreeWord&) const = default;

 private:
  int rank_ = 0;
  std::vector<Letter> letters_;
};

FreeWord reduce(int rank, std::vector<Letter> raw);

// w = conjugator * core * conjugator^-1 with core cyclically reduced.
struct CyclicDecomposition {
  FreeWord conjugator;
  FreeWord core;
};
CyclicDecomposition cyclic_decompose(const FreeWord& w);

// w evaluated on portraits, letters applied left to right (right action).
Portrait substitute(const FreeWord& w, std::span<const Portrait> gens);

// Level permutation of w given the level permutations of the generators and
// of their inverses.
std::vector<std::uint32_t> substitute_level(const FreeWord& w,
                                            std::span<const std::vector<std::uint32_t>> forward,
                                            std::span<const std::vector<std::uint32_t>> backward);

// Nielsen reduction of a pair: repeatedly replaces an element by a shorter
// product with the other (or its inverse) until no move shortens anything.
std::pair<FreeWord, FreeWord> nielsen_reduce(FreeWord u, FreeWord v);

// True iff <w1, w2> is not cyclic in F_m.
bool is_noncyclic(const FreeWord& w1, const FreeWord& w2);

// First pair (i, j), i < j, generating a non-cyclic subgroup; a subgroup of a
// free group is non-cyclic exactly when some pair of its generators is.
std::optional<std::pair<std::size_t, std::size_t>> noncyclic_pair(std::span<const FreeWord> words);

// Word literal syntax: whitespace-separated letters "x<i>" with an optional
// exponent "^<k>" (k a non-zero integer), e.g. "x1 x2^-1 x1". "1" or "e"
// denotes the empty word.
FreeWord parse_word(const std::string& text, int rank);
// Comma-separated list of word literals.
std::vector<FreeWord> parse_words(const std::string& text, int rank);
std::string to_string(const FreeWord& w);

}  // namespace treelift
