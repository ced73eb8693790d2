#include "treelift/words.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "treelift/error.hpp"

namespace treelift {

FreeWord::FreeWord(int rank, std::vector<Letter> raw) : rank_(rank) {
  if (rank < 0) throw Error("word rank must be non-negative");
  letters_.reserve(raw.size());
  for (const auto& x : raw) {
    if (x.gen < 1 || x.gen > rank) throw Error("word letter x" + std::to_string(x.gen) + " exceeds rank");
    if (x.exp != 1 && x.exp != -1) throw Error("word letter exponent must be +1 or -1");
    if (!letters_.empty() && letters_.back() == x.inverse())
      letters_.pop_back();
    else
      letters_.push_back(x);
  }
}

FreeWord reduce(int rank, std::vector<Letter> raw) { return FreeWord(rank, std::move(raw)); }

FreeWord FreeWord::inverse() const {
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (auto& x : out) x = x.inverse();
  FreeWord w;
  w.rank_ = rank_;
  w.letters_ = std::move(out);
  return w;
}

FreeWord FreeWord::power(int k) const {
  const FreeWord base = k < 0 ? inverse() : *this;
  std::vector<Letter> raw;
  for (int i = 0; i < std::abs(k); ++i) raw.insert(raw.end(), base.letters_.begin(), base.letters_.end());
  return FreeWord(rank_, std::move(raw));
}

bool FreeWord::is_cyclically_reduced() const {
  return letters_.size() < 2 || !(letters_.front() == letters_.back().inverse());
}

FreeWord operator*(const FreeWord& a, const FreeWord& b) {
  std::vector<Letter> raw = a.letters_;
  raw.insert(raw.end(), b.letters_.begin(), b.letters_.end());
  return FreeWord(std::max(a.rank_, b.rank_), std::move(raw));
}

CyclicDecomposition cyclic_decompose(const FreeWord& w) {
  if (w.empty()) throw Error("cyclic_decompose: empty word");
  const auto& x = w.letters();
  std::size_t lo = 0;
  std::size_t hi = x.size();
  while (hi - lo >= 2 && x[lo] == x[hi - 1].inverse()) {
    ++lo;
    --hi;
  }
  return {FreeWord(w.rank(), {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lo)}),
          FreeWord(w.rank(), {x.begin() + static_cast<std::ptrdiff_t>(lo),
                              x.begin() + static_cast<std::ptrdiff_t>(hi)})};
}

Portrait substitute(const FreeWord& w, std::span<const Portrait> gens) {
  if (static_cast<int>(gens.size()) != w.rank())
    throw Error("substitute: expected " + std::to_string(w.rank()) + " generators, got " +
                std::to_string(gens.size()));
  if (gens.empty()) throw Error("substitute: no generators");
  for (const auto& g : gens)
    if (!(g.shape() == gens[0].shape())) throw Error("substitute: generator shapes differ");
  std::vector<std::optional<Portrait>> inverses(gens.size());
  Portrait out(gens[0].shape());
  for (const auto& x : w.letters()) {
    const auto i = static_cast<std::size_t>(x.gen - 1);
    if (x.exp > 0) {
      out = compose(out, gens[i]);
    } else {
      if (!inverses[i]) inverses[i] = inverse(gens[i]);
      out = compose(out, *inverses[i]);
    }
  }
  return out;
}

std::vector<std::uint32_t> substitute_level(const FreeWord& w,
                                            std::span<const std::vector<std::uint32_t>> forward,
                                            std::span<const std::vector<std::uint32_t>> backward) {
  if (forward.empty() || forward.size() != backward.size() ||
      static_cast<int>(forward.size()) != w.rank())
    throw Error("substitute_level: rank mismatch");
  const auto size = forward[0].size();
  std::vector<std::uint32_t> out(size);
  for (std::size_t v = 0; v < size; ++v) {
    auto x = static_cast<std::uint32_t>(v);
    for (const auto& l : w.letters())
      x = (l.exp > 0 ? forward : backward)[static_cast<std::size_t>(l.gen - 1)][x];
    out[v] = x;
  }
  return out;
}

std::pair<FreeWord, FreeWord> nielsen_reduce(FreeWord u, FreeWord v) {
  bool changed = true;
  while (changed && !u.empty() && !v.empty()) {
    changed = false;
    for (int side = 0; side < 2 && !changed; ++side) {
      FreeWord& a = side == 0 ? u : v;
      const FreeWord& b = side == 0 ? v : u;
      const FreeWord bi = b.inverse();
      for (const FreeWord& c : {a * b, a * bi, b * a, bi * a}) {
        if (c.length() < a.length()) {
          a = c;
          changed = true;
          break;
        }
      }
    }
  }
  return {u, v};
}

bool is_noncyclic(const FreeWord& w1, const FreeWord& w2) {
  const auto [u, v] = nielsen_reduce(w1, w2);
  if (u.empty() || v.empty()) return false;
  // Two elements of a free group lie in a common cyclic subgroup exactly
  // when they commute.
  return !(u * v == v * u);
}

std::optional<std::pair<std::size_t, std::size_t>> noncyclic_pair(std::span<const FreeWord> words) {
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = i + 1; j < words.size(); ++j)
      if (is_noncyclic(words[i], words[j])) return std::make_pair(i, j);
  return std::nullopt;
}

FreeWord parse_word(const std::string& text, int rank) {
  std::istringstream is(text);
  std::string tok;
  std::vector<Letter> raw;
  bool any = false;
  while (is >> tok) {
    if (tok == "1" || tok == "e") {
      any = true;
      continue;
    }
    auto bad = [&] { return Error("malformed word literal '" + text + "' at token '" + tok + "'"); };
    if (tok.size() < 2 || tok[0] != 'x' || !std::isdigit(static_cast<unsigned char>(tok[1]))) throw bad();
    std::size_t pos = 1;
    int gen = 0;
    while (pos < tok.size() && std::isdigit(static_cast<unsigned char>(tok[pos])))
      gen = gen * 10 + (tok[pos++] - '0');
    int exp = 1;
    if (pos < tok.size()) {
      if (tok[pos] != '^' || pos + 1 == tok.size()) throw bad();
      std::size_t used = 0;
      try {
        exp = std::stoi(tok.substr(pos + 1), &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != tok.size() - pos - 1 || exp == 0) throw bad();
    }
    if (gen < 1 || gen > rank)
      throw Error("word literal '" + text + "' uses x" + std::to_string(gen) + " but rank is " +
                  std::to_string(rank));
    for (int k = 0; k < std::abs(exp); ++k) raw.push_back({gen, exp > 0 ? 1 : -1});
    any = true;
  }
  if (!any) throw Error("empty word literal");
  return FreeWord(rank, std::move(raw));
}

std::vector<FreeWord> parse_words(const std::string& text, int rank) {
  std::vector<FreeWord> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) out.push_back(parse_word(item, rank));
  if (out.empty()) throw Error("empty word list");
  return out;
}

std::string to_string(const FreeWord& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.letters().size(); ++i) {
    const auto& x = w.letters()[i];
    if (i) s += ' ';
    s += "x" + std::to_string(x.gen);
    if (x.exp < 0) s += "^-1";
  }
  return s;
}

}  // namespace treelift
